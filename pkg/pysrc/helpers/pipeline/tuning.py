"""
Seeded random search: a fixed number of trials, each a short training run
scored on validation. Trials may run in worker processes that read the split
from disk; rows are merged back by trial index.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import pandas as pd
from tqdm import tqdm

from pysrc.errors import HyprecError, NumericalError
from pysrc.helpers.pipeline.search_space import SearchSpace, sample_trials
from pysrc.helpers.pipeline.splits import Split, read_split, resolve_curvature, split_exists, training_view, write_split
from pysrc.helpers.pipeline.training import train_model, validation_metric
from pysrc.run_config import RunConfig, write_config_file

TRIALS_CSV = "trials.csv"
BEST_CONFIG = "best_config.txt"
SEARCH_METHOD = "random"
TRIAL_COLUMNS = [
    "trial",
    "status",
    "model",
    "lr",
    "latent_dim",
    "batch_size",
    "beta",
    "c",
    "best_epoch",
    "metric",
    "value",
    "seconds",
    "error",
    "config_hash",
]


def tune_dir(config: RunConfig) -> str:
    return os.path.join(config.output_dir, "tune", config.model)


def trial_config(config: RunConfig, draw: Dict[str, Any], c: float) -> RunConfig:
    overrides = dict(draw)
    overrides.update(epochs=config.epochs_per_trial, c_policy="fixed", c=c, quiet=True, workers=1)
    return config.with_overrides(**overrides).validate()


@dataclass
class TrialTask:
    index: int
    config: Dict[str, Any]
    out_dir: str


def _run(task: TrialTask, split: Split) -> Dict[str, Any]:
    config = RunConfig(**task.config)
    row: Dict[str, Any] = {
        "trial": task.index,
        "status": "ok",
        "model": config.model,
        "lr": config.lr,
        "latent_dim": config.latent_dim,
        "batch_size": config.batch_size,
        "beta": config.beta,
        "c": config.c,
        "best_epoch": None,
        "metric": validation_metric(config.protocol),
        "value": None,
        "seconds": 0.0,
        "error": "",
        "config_hash": config.hash(),
    }
    started = time.perf_counter()
    try:
        result = train_model(config, split, task.out_dir, c=config.c)
        row["best_epoch"] = result.best_epoch
        row["value"] = result.best_value
    except HyprecError as e:
        row["status"] = "failed"
        row["error"] = f"{type(e).__name__}: {e}"
    row["seconds"] = time.perf_counter() - started
    return row


def run_trial_from_disk(task: TrialTask, split_dir: str) -> Dict[str, Any]:
    config = RunConfig(**task.config)
    return _run(task, read_split(config.with_overrides(split_dir=split_dir)))


@dataclass
class TuneResult:
    trials: pd.DataFrame
    best: Optional[Dict[str, Any]]
    best_config: Optional[RunConfig]
    out_dir: str
    failures: int = 0
    space: Dict[str, Any] = field(default_factory=dict)


def tune(config: RunConfig, split: Split, space: SearchSpace, progress: bool = False) -> TuneResult:
    out_dir = tune_dir(config)
    os.makedirs(out_dir, exist_ok=True)
    train, _ = training_view(split)
    c, _ = resolve_curvature(config, train, progress=progress)

    draws = sample_trials(space, config.tune_trials, config.seed, config.model)
    tasks = [
        TrialTask(i, trial_config(config, draw, c).to_dict(), os.path.join(out_dir, f"trial_{i:03d}"))
        for i, draw in enumerate(draws)
    ]

    rows: List[Dict[str, Any]] = []
    if config.workers > 1:
        if not split_exists(config.resolved_split_dir):
            write_split(split, config)
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(run_trial_from_disk, task, config.resolved_split_dir) for task in tasks]
            for future in tqdm(as_completed(futures), total=len(futures), desc="Trials", unit="trial", disable=not progress):
                rows.append(future.result())
    else:
        for task in tqdm(tasks, desc="Trials", unit="trial", disable=not progress):
            rows.append(_run(task, split))

    frame = pd.DataFrame(rows, columns=TRIAL_COLUMNS).sort_values("trial").reset_index(drop=True)
    frame.to_csv(os.path.join(out_dir, TRIALS_CSV), index=False)

    ok = frame[frame["status"] == "ok"]
    failures = len(frame) - len(ok)
    if ok.empty:
        raise NumericalError(f"All {len(frame)} trials failed; see {os.path.join(out_dir, TRIALS_CSV)}.")
    # idxmax returns the first maximum, i.e. the lowest trial index on ties
    best = ok.loc[pd.to_numeric(ok["value"]).idxmax()].to_dict()
    best_config = RunConfig(**tasks[int(best["trial"])].config).with_overrides(
        epochs=config.epochs, quiet=config.quiet, workers=config.workers
    )
    write_config_file(best_config, os.path.join(out_dir, BEST_CONFIG))
    return TuneResult(frame, best, best_config, out_dir, failures, space.to_dict())
