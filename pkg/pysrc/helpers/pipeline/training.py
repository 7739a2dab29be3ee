"""
Epoch loop: minibatch forward/backward on the tape, one optimizer step per
batch, validation after every epoch, last/best checkpoints and a per-epoch CSV.

Each epoch draws its permutation and noise from a generator seeded with
(seed, epoch), so a run resumed from last.ckpt replays the same batches.
"""
from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from pysrc.errors import DataError, NumericalError
from pysrc.helpers.curvature.estimate import DeltaEstimate
from pysrc.helpers.evalharness.protocols import evaluate_strong, evaluate_weak
from pysrc.helpers.evalharness.report import append_csv_row
from pysrc.helpers.graddiff.tensor import backward, forward, value_of
from pysrc.helpers.models.base import RecModel, dense_rows
from pysrc.helpers.models.checkpoint import load_checkpoint, save_checkpoint
from pysrc.helpers.models.registry import build_model, model_from_checkpoint
from pysrc.helpers.optim.optimizer import Optimizer, OptimizerConfig
from pysrc.helpers.pipeline.splits import Split, resolve_curvature, training_view
from pysrc.run_config import RunConfig

EPOCHS_CSV = "epochs.csv"
LAST_CKPT = "last.ckpt"
BEST_CKPT = "best.ckpt"
EPOCH_COLUMNS = ["epoch", "loss", "metric", "value", "seconds"]
RESUME_FREE_KEYS = ("epochs", "quiet", "workers", "output_dir")


def epoch_rng(seed: int, epoch: int) -> np.random.Generator:
    return np.random.default_rng([seed, epoch])


def validation_metric(protocol: str) -> str:
    return "NDCG@10" if protocol == "weak" else "NDCG@100"


def optimizer_config(config: RunConfig) -> OptimizerConfig:
    return OptimizerConfig(
        lr=config.lr,
        clip_norm=config.clip_norm,
        per_coordinate_v=config.per_coordinate_v,
        pt_approx=config.pt_approx == "conformal-ratio",
    )


def validate(model: RecModel, split: Split, validation, eval_batch: int) -> float:
    if validation is not None:
        report = evaluate_weak(model.score, validation, cutoffs=(10,), batch_size=eval_batch, group="val")
        return report.metrics["NDCG@10"]
    report = evaluate_strong(model.score, split, group="val", cutoffs=(100,), batch_size=eval_batch)
    return report.metrics["NDCG@100"]


def loss_and_grads(model: RecModel, x: np.ndarray, noise=None):
    out, tape = forward(lambda **p: model.loss(p, x, noise), model.values())
    return float(value_of(out).reshape(())), backward(tape)


@dataclass
class EpochStats:
    loss: float
    steps: int
    rejected_steps: int = 0
    clipped_steps: int = 0


def train_epoch(
    model: RecModel,
    optimizer: Optimizer,
    matrix,
    batch_size: int,
    rng: np.random.Generator,
    progress: bool = False,
) -> EpochStats:
    rows = np.flatnonzero(np.diff(matrix.indptr) > 0)
    order = rng.permutation(rows)
    losses: List[float] = []
    sizes: List[int] = []
    rejected = clipped = 0
    starts = range(0, len(order), batch_size)
    for start in tqdm(starts, desc="Batches", unit="batch", leave=False, disable=not progress):
        idx = order[start : start + batch_size]
        x = dense_rows(matrix[idx])
        shape = model.noise_shape(len(idx))
        noise = None if shape is None else rng.standard_normal(shape)
        loss, grads = loss_and_grads(model, x, noise)
        if not math.isfinite(loss):
            raise NumericalError("Training diverged: a batch produced a non-finite loss.")
        report = optimizer.step(model.params, grads)
        rejected += int(not report.accepted)
        clipped += int(report.clipped)
        losses.append(loss * len(idx))
        sizes.append(len(idx))
    mean = math.fsum(losses) / max(1, sum(sizes))
    return EpochStats(loss=mean, steps=len(sizes), rejected_steps=rejected, clipped_steps=clipped)


@dataclass
class TrainResult:
    model: RecModel
    out_dir: str
    metric: str
    best_epoch: Optional[int]
    best_value: Optional[float]
    history: List[Dict[str, Any]] = field(default_factory=list)
    delta_estimate: Optional[DeltaEstimate] = None
    rejected_steps: int = 0
    resumed_from: Optional[int] = None

    @property
    def best_checkpoint(self) -> str:
        return os.path.join(self.out_dir, BEST_CKPT)


def _reset_log(path: str) -> None:
    pd.DataFrame(columns=EPOCH_COLUMNS).to_csv(path, index=False)


def _truncate_log(path: str, last_epoch: int) -> None:
    if not os.path.isfile(path):
        _reset_log(path)
        return
    frame = pd.read_csv(path)
    frame[frame["epoch"] <= last_epoch].to_csv(path, index=False)


def _check_resumable(header: Dict[str, Any], config: RunConfig) -> None:
    saved = header.get("config", {})
    current = config.to_dict()
    differing = sorted(
        key for key in current if key not in RESUME_FREE_KEYS and saved.get(key) != current[key]
    )
    if differing:
        raise DataError(f"Cannot resume: settings differ from the checkpoint ({', '.join(differing)}).")


def train_model(
    config: RunConfig,
    split: Split,
    out_dir: str,
    resume: bool = False,
    progress: bool = False,
    c: Optional[float] = None,
    delta: Optional[DeltaEstimate] = None,
) -> TrainResult:
    train, validation = training_view(split)
    if c is None:
        c, delta = resolve_curvature(config, train, progress=progress)
    metric = validation_metric(config.protocol)
    os.makedirs(out_dir, exist_ok=True)
    log_path = os.path.join(out_dir, EPOCHS_CSV)
    last_path = os.path.join(out_dir, LAST_CKPT)
    best_path = os.path.join(out_dir, BEST_CKPT)

    def header(epoch: int, best_epoch, best_value) -> Dict[str, Any]:
        return {
            "config": config.to_dict(),
            "config_hash": config.hash(),
            "seed": config.seed,
            "split_seed": split.seed,
            "protocol": config.protocol,
            "epoch": epoch,
            "metric": metric,
            "best_epoch": best_epoch,
            "best_value": best_value,
            "delta_estimate": None if delta is None else delta.to_dict(),
        }

    if config.model in ("puresvd", "popularity"):
        started = time.perf_counter()
        model = build_model(config.model, train.n_items, config.latent_dim, c, seed=config.seed, train_matrix=train.matrix)
        value = validate(model, split, validation, config.eval_batch)
        row = {"epoch": 0, "loss": float("nan"), "metric": metric, "value": value, "seconds": time.perf_counter() - started}
        _reset_log(log_path)
        append_csv_row(log_path, row)
        save_checkpoint(best_path, model, extra=header(0, 0, value))
        save_checkpoint(last_path, model, extra=header(0, 0, value))
        return TrainResult(model, out_dir, metric, 0, value, [row], delta)

    model = build_model(
        config.model,
        train.n_items,
        config.latent_dim,
        c,
        seed=config.seed,
        beta=config.beta,
        hidden_tanh=config.hidden_tanh,
    )
    optimizer = Optimizer(model.params, optimizer_config(config))
    start_epoch = 0
    best_epoch: Optional[int] = None
    best_value: Optional[float] = None
    resumed_from: Optional[int] = None

    if resume and os.path.isfile(last_path):
        ckpt = load_checkpoint(last_path)
        _check_resumable(ckpt.header, config)
        model = model_from_checkpoint(ckpt)
        optimizer = Optimizer(model.params, optimizer_config(config))
        if ckpt.header.get("optimizer"):
            optimizer.load_state_arrays(ckpt.optimizer_arrays, ckpt.header["optimizer"]["t"])
        start_epoch = resumed_from = ckpt.epoch
        best_epoch = ckpt.header.get("best_epoch")
        best_value = ckpt.header.get("best_value")
        if ckpt.header.get("delta_estimate"):
            delta = DeltaEstimate.from_dict(ckpt.header["delta_estimate"])
        _truncate_log(log_path, start_epoch)
    else:
        _reset_log(log_path)
        save_checkpoint(last_path, model, optimizer, extra=header(0, None, None))
        save_checkpoint(best_path, model, optimizer, extra=header(0, None, None))

    history: List[Dict[str, Any]] = []
    rejected_total = 0
    epochs = range(start_epoch + 1, config.epochs + 1)
    bar = tqdm(epochs, desc=f"Training {model.describe()}", unit="epoch", disable=not progress)
    for epoch in bar:
        started = time.perf_counter()
        stats = train_epoch(model, optimizer, train.matrix, config.batch_size, epoch_rng(config.seed, epoch), progress)
        value = validate(model, split, validation, config.eval_batch)
        row = {
            "epoch": epoch,
            "loss": stats.loss,
            "metric": metric,
            "value": value,
            "seconds": time.perf_counter() - started,
        }
        append_csv_row(log_path, row)
        history.append(row)
        rejected_total += stats.rejected_steps
        if best_value is None or value > best_value:
            best_epoch, best_value = epoch, value
            save_checkpoint(best_path, model, optimizer, extra=header(epoch, best_epoch, best_value))
        save_checkpoint(last_path, model, optimizer, extra=header(epoch, best_epoch, best_value))
        bar.set_postfix(loss=f"{stats.loss:.4f}", **{metric: f"{value:.4f}"})

    return TrainResult(
        model=model,
        out_dir=out_dir,
        metric=metric,
        best_epoch=best_epoch,
        best_value=best_value,
        history=history,
        delta_estimate=delta,
        rejected_steps=rejected_total,
        resumed_from=resumed_from,
    )
