"""
Weak (leave-one-out against sampled negatives) and strong (fold-in of unseen
users) evaluation. A scorer maps a CSR batch of input rows to a dense
(batch, items) score array.
"""
from __future__ import annotations

import math
import time
from typing import Callable, Dict, List, Sequence

import numpy as np
from tqdm import tqdm

from pysrc.errors import DataError, NumericalError
from pysrc.helpers.evalharness.metrics import (
    hr_at_n,
    ndcg_strong,
    ndcg_weak,
    rank_of,
    recall_at_n,
    top_n_items,
)
from pysrc.helpers.evalharness.report import EvalReport, metric_key
from pysrc.helpers.recdata.splitting import StrongSplit, WeakSplit

WEAK_CUTOFFS = (1, 5, 10)
STRONG_CUTOFFS = (50, 100)
DEFAULT_EVAL_BATCH = 256

Scorer = Callable[..., np.ndarray]


def _checked_scores(scorer: Scorer, rows, n_items: int) -> np.ndarray:
    scores = np.array(scorer(rows), dtype=np.float64)
    if scores.shape != (rows.shape[0], n_items):
        raise DataError(f"Scorer returned shape {scores.shape}, expected {(rows.shape[0], n_items)}.")
    if not np.all(np.isfinite(scores)):
        raise NumericalError("Scorer returned non-finite scores.")
    return scores


def _batches(n: int, batch_size: int):
    for start in range(0, n, batch_size):
        yield slice(start, min(start + batch_size, n))


def _average(values: Dict[str, List[float]]) -> Dict[str, float]:
    return {key: math.fsum(v) / len(v) for key, v in values.items()}


def evaluate_weak(
    scorer: Scorer,
    split: WeakSplit,
    cutoffs: Sequence[int] = WEAK_CUTOFFS,
    batch_size: int = DEFAULT_EVAL_BATCH,
    model: str = "",
    group: str = "test",
    progress: bool = False,
) -> EvalReport:
    cutoffs = sorted(int(n) for n in cutoffs)
    if len(split.users) == 0:
        raise DataError("The weak split has no evaluated users.")
    started = time.perf_counter()
    per_metric: Dict[str, List[float]] = {
        metric_key(name, n): [] for n in cutoffs for name in ("HR", "NDCG")
    }
    batches = list(_batches(len(split.users), batch_size))
    for sl in tqdm(batches, desc="Evaluating", unit="batch", disable=not progress):
        users = split.users[sl]
        scores = _checked_scores(scorer, split.train.matrix[users], split.n_items)
        for row, test_item, negs in zip(scores, split.test_items[sl], split.negatives[sl]):
            candidates = np.concatenate([[test_item], negs]).astype(np.int64)
            rank = rank_of(row[test_item], int(test_item), row[candidates], candidates)
            for n in cutoffs:
                per_metric[metric_key("HR", n)].append(hr_at_n(rank, n))
                per_metric[metric_key("NDCG", n)].append(ndcg_weak(rank, n))

    return EvalReport(
        protocol="weak",
        cutoffs=cutoffs,
        metrics=_average(per_metric),
        n_users=len(split.users),
        seed=split.seed,
        model=model,
        wall_time=time.perf_counter() - started,
        group=group,
        extra={"negatives_shortfall_users": len(split.shortfall), "excluded_users": split.excluded_users},
    )


def evaluate_strong(
    scorer: Scorer,
    split: StrongSplit,
    group: str = "test",
    cutoffs: Sequence[int] = STRONG_CUTOFFS,
    batch_size: int = DEFAULT_EVAL_BATCH,
    model: str = "",
    progress: bool = False,
) -> EvalReport:
    if group not in split.groups:
        raise DataError(f"Strong split has no '{group}' group.")
    cutoffs = sorted(int(n) for n in cutoffs)
    g = split.groups[group]
    n_users = g.foldin.shape[0]
    if n_users == 0:
        raise DataError(f"Group '{group}' has no users.")
    started = time.perf_counter()
    per_metric: Dict[str, List[float]] = {
        metric_key(name, n): [] for n in cutoffs for name in ("Recall", "NDCG")
    }
    depth = max(cutoffs)
    batches = list(_batches(n_users, batch_size))
    for sl in tqdm(batches, desc="Evaluating", unit="batch", disable=not progress):
        foldin = g.foldin[sl]
        heldout = g.heldout[sl]
        scores = _checked_scores(scorer, foldin, split.n_items)
        for i in range(scores.shape[0]):
            row = scores[i]
            row[foldin.indices[foldin.indptr[i] : foldin.indptr[i + 1]]] = -np.inf
            held = heldout.indices[heldout.indptr[i] : heldout.indptr[i + 1]]
            ranked = top_n_items(row, depth)
            ranked = ranked[np.isfinite(row[ranked])]
            for n in cutoffs:
                per_metric[metric_key("Recall", n)].append(recall_at_n(ranked[:n], held, n))
                per_metric[metric_key("NDCG", n)].append(ndcg_strong(ranked, held, n))

    return EvalReport(
        protocol="strong",
        cutoffs=cutoffs,
        metrics=_average(per_metric),
        n_users=n_users,
        seed=split.seed,
        model=model,
        wall_time=time.perf_counter() - started,
        group=group,
    )