from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from pysrc.errors import UsageError


@dataclass(frozen=True)
class SearchSpace:
    lr: Tuple[float, float] = (1e-4, 1e-1)  # log-uniform bounds
    latent_dim: Tuple[int, ...] = (32, 64, 128, 256)
    batch_size: Tuple[int, ...] = (128, 256, 512)
    beta: Tuple[float, ...] = (0.5, 1.0)

    def validate(self) -> "SearchSpace":
        lo, hi = self.lr
        if not 0.0 < lo <= hi:
            raise UsageError(f"lr range must satisfy 0 < lo <= hi, got {self.lr}.")
        for name in ("latent_dim", "batch_size", "beta"):
            values = getattr(self, name)
            if not values:
                raise UsageError(f"Search space '{name}' has no choices.")
        if min(self.latent_dim) < 1 or min(self.batch_size) < 1:
            raise UsageError("latent_dim and batch_size choices must be >= 1.")
        if min(self.beta) < 0:
            raise UsageError("beta choices must be >= 0.")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lr": list(self.lr),
            "latent_dim": list(self.latent_dim),
            "batch_size": list(self.batch_size),
            "beta": list(self.beta),
        }

    def sample(self, rng: np.random.Generator, family: str) -> Dict[str, Any]:
        # every family draws all four values so shared seeds give shared lr/d/batch
        log_lo, log_hi = np.log(self.lr[0]), np.log(self.lr[1])
        draw = {
            "lr": float(np.exp(rng.uniform(log_lo, log_hi))),
            "latent_dim": int(self.latent_dim[rng.integers(len(self.latent_dim))]),
            "batch_size": int(self.batch_size[rng.integers(len(self.batch_size))]),
            "beta": float(self.beta[rng.integers(len(self.beta))]),
        }
        if family != "hvae":
            draw.pop("beta")
        return draw


def _numbers(key: str, raw: str, kind) -> Tuple:
    try:
        return tuple(kind(v.strip()) for v in raw.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"Search space '{key}' expects comma-separated numbers, got '{raw}'.")


def parse_search_space(text: str, source: str = "<search-space>") -> SearchSpace:
    kinds = {"lr": float, "latent_dim": int, "batch_size": int, "beta": float}
    values: Dict[str, Tuple] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{source}:{number}: expected key=value, got '{stripped}'.")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        key = key.replace("-", "_")
        if key not in kinds:
            raise UsageError(f"{source}:{number}: unknown search-space key '{key}'.")
        values[key] = _numbers(key, raw, kinds[key])
    if "lr" in values and len(values["lr"]) != 2:
        raise UsageError(f"{source}: lr takes exactly two bounds, 'lr=lo,hi'.")
    return SearchSpace(**values).validate()


def load_search_space(path: Optional[str]) -> SearchSpace:
    if not path:
        return SearchSpace()
    if not os.path.isfile(path):
        raise UsageError(f"Search-space file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return parse_search_space(f.read(), source=path)


def sample_trials(space: SearchSpace, n_trials: int, seed: int, family: str) -> List[Dict[str, Any]]:
    rng = np.random.default_rng(seed)
    return [space.sample(rng, family) for _ in range(n_trials)]
