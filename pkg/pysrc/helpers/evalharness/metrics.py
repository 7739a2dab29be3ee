from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from pysrc.errors import DataError


def hr_at_n(rank: int, n: int) -> float:
    if rank < 1:
        raise ValueError(f"Ranks are 1-indexed, got {rank}.")
    return 1.0 if rank <= n else 0.0


def ndcg_weak(rank: int, n: int) -> float:
    if rank < 1:
        raise ValueError(f"Ranks are 1-indexed, got {rank}.")
    if rank > n:
        return 0.0
    return 1.0 / math.log2(rank + 1)


def _heldout_set(heldout: Iterable[int]) -> set:
    held = set(int(i) for i in heldout)
    if not held:
        raise DataError("Held-out set is empty.")
    return held


def recall_at_n(top_n: Sequence[int], heldout: Iterable[int], n: int = None) -> float:
    """|topN ∩ heldout| / min(N, |heldout|); N defaults to len(top_n)."""
    held = _heldout_set(heldout)
    n = len(top_n) if n is None else n
    hits = sum(1 for item in list(top_n)[:n] if int(item) in held)
    return hits / min(n, len(held))


def ndcg_strong(ranked: Sequence[int], heldout: Iterable[int], n: int) -> float:
    held = _heldout_set(heldout)
    dcg = math.fsum(
        1.0 / math.log2(i + 2) for i, item in enumerate(list(ranked)[:n]) if int(item) in held
    )
    ideal = math.fsum(1.0 / math.log2(i + 2) for i in range(min(n, len(held))))
    return dcg / ideal


def rank_of(target_score: float, target_item: int, scores: np.ndarray, items: np.ndarray) -> int:
    """1-indexed rank of the target among candidates; ties go to the lower item index."""
    better = scores > target_score
    tied_before = (scores == target_score) & (items < target_item)
    return 1 + int(np.count_nonzero(better | tied_before))


def top_n_items(scores: np.ndarray, n: int) -> np.ndarray:
    """Item indices of the n largest scores, ties broken by ascending index."""
    n = min(n, scores.shape[-1])
    # lexsort uses the last key as primary: descending score, then ascending index
    order = np.lexsort((np.arange(scores.shape[-1]), -scores))
    return order[:n]
