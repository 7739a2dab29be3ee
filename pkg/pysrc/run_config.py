"""
RunConfig: every knob of a pipeline run, validated before any compute.

Precedence, lowest first: dataclass defaults, HYPREC_SEED, the key=value file
given with --config, explicit command-line flags.
"""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Optional

from pysrc.errors import UsageError
from pysrc.helpers.curvature.delta import DEFAULT_SAMPLE_SIZE, DEFAULT_TRIALS
from pysrc.helpers.curvature.estimate import DEFAULT_RANK
from pysrc.helpers.curvature.svd import EMBEDDINGS
from pysrc.helpers.models.registry import MODEL_FAMILIES
from pysrc.helpers.provenance import config_hash
from pysrc.helpers.recdata.loading import FORMATS
from pysrc.helpers.recdata.splitting import DEFAULT_FOLDIN_RATIO, DEFAULT_NEGATIVES, HOLDOUT_RULES

SEED_ENV = "HYPREC_SEED"
DEFAULT_OUTPUT_DIR = ".hyprec"
PROTOCOLS = ("weak", "strong")
C_POLICIES = ("fixed", "estimate", "unit")
PT_MODES = ("exact", "conformal-ratio")

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


@dataclass(frozen=True)
class RunConfig:
    # data
    dataset: Optional[str] = None
    fmt: str = "movielens-dat"
    min_user_items: int = 1
    rating_threshold: Optional[float] = None
    # split
    protocol: str = "weak"
    n_negatives: int = DEFAULT_NEGATIVES
    holdout: str = "latest"
    foldin_ratio: float = DEFAULT_FOLDIN_RATIO
    n_val_users: Optional[int] = None
    n_test_users: Optional[int] = None
    split_dir: Optional[str] = None
    # curvature
    rank: int = DEFAULT_RANK
    sample_size: int = DEFAULT_SAMPLE_SIZE
    delta_trials: int = DEFAULT_TRIALS
    embedding: str = "VS"
    raw_delta: bool = False
    # model
    model: str = "hae-m"
    c_policy: str = "fixed"
    c: float = 1.0
    latent_dim: int = 64
    beta: float = 1.0
    hidden_tanh: bool = False
    # optimization
    lr: float = 1e-3
    batch_size: int = 256
    epochs: int = 20
    clip_norm: float = 5.0
    per_coordinate_v: bool = False
    pt_approx: str = "exact"
    # tuning
    tune_trials: int = 40
    epochs_per_trial: int = 20
    search_space: Optional[str] = None
    # run
    seed: int = 0
    workers: int = 1
    eval_batch: int = 256
    output_dir: str = DEFAULT_OUTPUT_DIR
    quiet: bool = False

    @property
    def debug_dir(self) -> str:
        return os.path.join(self.output_dir, "debug")

    @property
    def resolved_split_dir(self) -> str:
        return self.split_dir or os.path.join(self.output_dir, "split")

    @property
    def is_gradient_model(self) -> bool:
        return self.model in ("ae", "hae-h", "hae-m", "hvae")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def hash(self) -> str:
        return config_hash(self.to_dict())

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        unknown = set(overrides) - _field_names()
        if unknown:
            raise UsageError(f"Unknown config keys: {', '.join(sorted(unknown))}")
        return replace(self, **overrides)

    def validate(self) -> "RunConfig":
        def need(ok: bool, message: str) -> None:
            if not ok:
                raise UsageError(message)

        need(self.fmt in FORMATS, f"fmt must be one of {tuple(FORMATS)}, got '{self.fmt}'.")
        need(self.min_user_items >= 1, "min_user_items must be >= 1.")
        need(self.protocol in PROTOCOLS, f"protocol must be one of {PROTOCOLS}.")
        need(self.n_negatives >= 1, "n_negatives must be >= 1.")
        need(self.holdout in HOLDOUT_RULES, f"holdout must be one of {HOLDOUT_RULES}.")
        need(0.0 < self.foldin_ratio < 1.0, "foldin_ratio must lie in (0, 1).")
        for name in ("n_val_users", "n_test_users"):
            value = getattr(self, name)
            need(value is None or value >= 1, f"{name} must be >= 1.")
        need(self.rank >= 1, "rank must be >= 1.")
        need(self.sample_size >= 4, "sample_size must be >= 4.")
        need(self.delta_trials >= 1, "delta_trials must be >= 1.")
        need(self.embedding in EMBEDDINGS, f"embedding must be one of {EMBEDDINGS}.")
        need(self.model in MODEL_FAMILIES, f"model must be one of {MODEL_FAMILIES}.")
        need(self.c_policy in C_POLICIES, f"c_policy must be one of {C_POLICIES}.")
        need(self.c >= 0.0, "c must be >= 0.")
        if self.model == "hvae" and self.c_policy == "fixed":
            need(self.c > 0.0, "hvae needs c > 0.")
        need(self.latent_dim >= 1, "latent_dim must be >= 1.")
        need(self.beta >= 0.0, "beta must be >= 0.")
        need(self.lr > 0.0, "lr must be > 0.")
        need(self.batch_size >= 1, "batch_size must be >= 1.")
        need(self.epochs >= 0, "epochs must be >= 0.")
        need(self.clip_norm >= 0.0, "clip_norm must be >= 0 (0 disables clipping).")
        need(self.pt_approx in PT_MODES, f"pt_approx must be one of {PT_MODES}.")
        need(self.tune_trials >= 1, "tune_trials must be >= 1.")
        need(self.epochs_per_trial >= 0, "epochs_per_trial must be >= 0.")
        need(self.workers >= 1, "workers must be >= 1.")
        need(self.eval_batch >= 1, "eval_batch must be >= 1.")
        need(self.seed >= 0, "seed must be >= 0.")
        return self

    def require(self, *names: str) -> None:
        missing = [name for name in names if getattr(self, name) in (None, "")]
        if missing:
            flags = ", ".join("--" + name.replace("_", "-") for name in missing)
            raise UsageError(f"Missing required setting(s): {flags}")


def _field_names():
    return {f.name for f in fields(RunConfig)}


def _field_types() -> Dict[str, str]:
    return {f.name: str(f.type) for f in fields(RunConfig)}


def _coerce(key: str, raw: str, type_name: str) -> Any:
    text = raw.strip()
    optional = type_name.startswith("Optional[")
    base = type_name[len("Optional[") : -1] if optional else type_name
    if optional and text.lower() in ("", "none", "null"):
        return None
    try:
        if base == "bool":
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ValueError(text)
        if base == "int":
            return int(text)
        if base == "float":
            return float(text)
    except ValueError:
        raise UsageError(f"Config key '{key}' expects {base}, got '{raw}'.")
    return text


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, Any]:
    types = _field_types()
    out: Dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{source}:{number}: expected key=value, got '{stripped}'.")
        key, value = stripped.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in _field_names():
            raise UsageError(f"{source}:{number}: unknown config key '{key}'.")
        out[key] = _coerce(key, value, types[key])
    return out


def read_config_file(path: str) -> Dict[str, Any]:
    if not os.path.isfile(path):
        raise UsageError(f"Config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return parse_config_text(f.read(), source=path)


def write_config_file(config: RunConfig, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for key, value in config.to_dict().items():
            f.write(f"{key}={'none' if value is None else value}\n")


def build_config(config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    values: Dict[str, Any] = {}
    env_seed = os.environ.get(SEED_ENV)
    if env_seed not in (None, ""):
        values["seed"] = _coerce("seed", env_seed, "int")
    if config_path:
        values.update(read_config_file(config_path))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig().with_overrides(**values).validate()
