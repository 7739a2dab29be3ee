from __future__ import annotations

import os
from typing import Optional, Tuple, Union

from pysrc.errors import DataError
from pysrc.helpers.curvature.estimate import DeltaEstimate, estimate_c
from pysrc.helpers.recdata.artifacts import SPLIT_JSON, load_split, save_split
from pysrc.helpers.recdata.loading import InteractionMatrix, load_interactions
from pysrc.helpers.recdata.splitting import StrongSplit, WeakSplit, split_strong, split_weak, weak_validation
from pysrc.run_config import RunConfig

Split = Union[WeakSplit, StrongSplit]


def load_dataset(config: RunConfig) -> InteractionMatrix:
    config.require("dataset")
    return load_interactions(
        config.dataset,
        fmt=config.fmt,
        min_user_items=config.min_user_items,
        rating_threshold=config.rating_threshold,
    )


def make_split(m: InteractionMatrix, config: RunConfig) -> Split:
    if config.protocol == "weak":
        return split_weak(m, n_negatives=config.n_negatives, seed=config.seed, holdout=config.holdout)
    return split_strong(
        m,
        n_val_users=config.n_val_users,
        n_test_users=config.n_test_users,
        foldin_ratio=config.foldin_ratio,
        seed=config.seed,
    )


def split_exists(split_dir: str) -> bool:
    return os.path.isfile(os.path.join(split_dir, SPLIT_JSON))


def write_split(split: Split, config: RunConfig) -> str:
    out_dir = config.resolved_split_dir
    save_split(split, out_dir, config=config.to_dict(), config_hash=config.hash())
    return out_dir


def read_split(config: RunConfig) -> Split:
    split = load_split(config.resolved_split_dir)
    if split.protocol != config.protocol:
        raise DataError(
            f"Split at {config.resolved_split_dir} uses the {split.protocol} protocol, "
            f"the run asks for {config.protocol}."
        )
    return split


def training_view(split: Split) -> Tuple[InteractionMatrix, Optional[WeakSplit]]:
    """
    The matrix a model is fitted on plus, for the weak protocol, the nested
    validation split its epochs are scored against. Strong splits validate on
    their own "val" group.
    """
    if isinstance(split, WeakSplit):
        validation = weak_validation(split)
        return validation.train, validation
    return split.train, None


def resolve_curvature(config: RunConfig, train: InteractionMatrix, progress: bool = False) -> Tuple[float, Optional[DeltaEstimate]]:
    if config.model in ("ae", "puresvd", "popularity"):
        return 0.0, None
    if config.c_policy == "unit":
        return 1.0, None
    if config.c_policy == "fixed":
        return config.c, None
    estimate = estimate_c(
        train.matrix,
        rank=min(config.rank, min(train.matrix.shape)),
        sample_size=config.sample_size,
        trials=config.delta_trials,
        seed=config.seed,
        embedding=config.embedding,
        raw_delta=config.raw_delta,
        workers=config.workers,
        progress=progress,
    )
    estimate.config = config.to_dict()
    estimate.config_hash = config.hash()
    return estimate.c, estimate
