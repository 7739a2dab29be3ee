"""
Weak (leave-one-out + sampled negatives) and strong (held-out users with
fold-in) evaluation splits. Both are pure functions of (matrix, params, seed).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import scipy.sparse as sp

from pysrc.errors import DataError
from pysrc.helpers.recdata.loading import InteractionMatrix, _build_csr

DEFAULT_NEGATIVES = 100
DEFAULT_FOLDIN_RATIO = 0.8
GROUP_FRACTION = 0.1
GROUP_CAP = 10000
VALIDATION_SEED_OFFSET = 1
HOLDOUT_RULES = ("latest", "random")


@dataclass
class WeakSplit:
    train: InteractionMatrix
    users: np.ndarray  # evaluated users
    test_items: np.ndarray  # one per evaluated user
    negatives: List[np.ndarray]
    seed: Optional[int]
    n_negatives: int = DEFAULT_NEGATIVES
    holdout: str = "latest"
    shortfall: Dict[int, int] = field(default_factory=dict)
    excluded_users: int = 0

    protocol = "weak"

    @property
    def n_items(self) -> int:
        return self.train.n_items

    def verify(self) -> None:
        for user, test_item, negs in zip(self.users, self.test_items, self.negatives):
            row = self.train.row_items(int(user))
            if np.isin(test_item, row):
                raise DataError(f"Test item {test_item} of user {user} is in its training row.")
            if np.isin(negs, row).any() or np.isin(test_item, negs):
                raise DataError(f"Negatives of user {user} overlap its known items.")
            if len(np.unique(negs)) != len(negs):
                raise DataError(f"Negatives of user {user} contain duplicates.")


@dataclass
class EvalGroup:
    users: np.ndarray  # original user indices
    foldin: sp.csr_matrix  # len(users) x items
    heldout: sp.csr_matrix


@dataclass
class StrongSplit:
    train: InteractionMatrix  # train users only
    train_users: np.ndarray
    groups: Dict[str, EvalGroup]
    seed: Optional[int]
    foldin_ratio: float = DEFAULT_FOLDIN_RATIO

    protocol = "strong"

    @property
    def n_items(self) -> int:
        return self.train.n_items

    def verify(self) -> None:
        seen = set(int(u) for u in self.train_users)
        for name, group in self.groups.items():
            members = set(int(u) for u in group.users)
            if members & seen:
                raise DataError(f"Group '{name}' overlaps the training users or another group.")
            seen |= members
            overlap = group.foldin.multiply(group.heldout)
            if overlap.nnz:
                raise DataError(f"Group '{name}' has items both in fold-in and held-out rows.")
            if np.any(np.diff(group.heldout.indptr) == 0):
                raise DataError(f"Group '{name}' has a user with an empty held-out row.")


def _pick_holdout(items: np.ndarray, stamps: Optional[np.ndarray], rng, holdout: str) -> int:
    if holdout == "latest" and stamps is not None:
        latest = stamps == stamps.max()
        # rows are sorted by item index, so the first latest item has the lowest index
        return int(np.flatnonzero(latest)[0])
    return int(rng.integers(len(items)))


def split_weak(
    m: InteractionMatrix,
    n_negatives: int = DEFAULT_NEGATIVES,
    seed: Optional[int] = 0,
    holdout: str = "latest",
) -> WeakSplit:
    """Hold out one item per user (latest by timestamp when known) plus sampled negatives."""
    if holdout not in HOLDOUT_RULES:
        raise ValueError(f"Unknown holdout rule '{holdout}'.")
    rng = np.random.default_rng(seed)
    all_items = np.arange(m.n_items)

    keep_mask = np.ones(m.nnz, dtype=bool)
    users: List[int] = []
    test_items: List[int] = []
    negatives: List[np.ndarray] = []
    shortfall: Dict[int, int] = {}
    excluded = 0

    for user in range(m.n_users):
        start = m.matrix.indptr[user]
        items = m.row_items(user)
        if len(items) < 2:
            excluded += 1
            continue
        pos = _pick_holdout(items, m.row_timestamps(user), rng, holdout)
        keep_mask[start + pos] = False
        candidates = np.setdiff1d(all_items, items, assume_unique=True)
        take = min(n_negatives, len(candidates))
        if take < n_negatives:
            shortfall[user] = n_negatives - take
        negatives.append(np.sort(rng.choice(candidates, size=take, replace=False)).astype(np.int64))
        users.append(user)
        test_items.append(int(items[pos]))

    train = _subset_entries(m, keep_mask)
    split = WeakSplit(
        train=train,
        users=np.asarray(users, dtype=np.int64),
        test_items=np.asarray(test_items, dtype=np.int64),
        negatives=negatives,
        seed=seed,
        n_negatives=n_negatives,
        holdout=holdout,
        shortfall=shortfall,
        excluded_users=excluded,
    )
    split.verify()
    return split


def _subset_entries(m: InteractionMatrix, keep: np.ndarray) -> InteractionMatrix:
    rows = np.repeat(np.arange(m.n_users), np.diff(m.matrix.indptr))[keep]
    cols = m.matrix.indices[keep]
    values = m.matrix.data[keep]
    stamps = None if m.timestamps is None else m.timestamps[keep]
    matrix, stamps = _build_csr(rows, cols, values, m.n_users, m.n_items, stamps)
    return InteractionMatrix(
        matrix=matrix,
        user_ids=m.user_ids,
        item_ids=m.item_ids,
        timestamps=stamps,
        raw_count=int(keep.sum()),
    )


def weak_validation(split: WeakSplit) -> WeakSplit:
    """Nested leave-one-out over the weak training matrix, used for model selection."""
    base = None if split.seed is None else split.seed + VALIDATION_SEED_OFFSET
    return split_weak(split.train, split.n_negatives, seed=base, holdout=split.holdout)


def default_group_size(n_users: int) -> int:
    return max(1, min(int(GROUP_FRACTION * n_users), GROUP_CAP))


def _foldin_count(n_items: int, ratio: float) -> int:
    return min(max(1, int(np.floor(ratio * n_items))), n_items - 1)


def _split_rows(m: InteractionMatrix, users: np.ndarray, ratio: float, rng) -> EvalGroup:
    fold_rows, held_rows = [], []
    for user in users:
        items = m.row_items(int(user))
        perm = rng.permutation(len(items))
        n_fold = _foldin_count(len(items), ratio)
        fold_rows.append(np.sort(items[perm[:n_fold]]))
        held_rows.append(np.sort(items[perm[n_fold:]]))
    return EvalGroup(
        users=users.astype(np.int64),
        foldin=_rows_to_csr(fold_rows, m.n_items),
        heldout=_rows_to_csr(held_rows, m.n_items),
    )


def _rows_to_csr(rows: List[np.ndarray], n_items: int) -> sp.csr_matrix:
    indptr = np.concatenate([[0], np.cumsum([len(r) for r in rows])]).astype(np.int64)
    indices = np.concatenate(rows).astype(np.int64) if rows else np.zeros(0, dtype=np.int64)
    return sp.csr_matrix((np.ones(len(indices)), indices, indptr), shape=(len(rows), n_items))


def split_strong(
    m: InteractionMatrix,
    n_val_users: Optional[int] = None,
    n_test_users: Optional[int] = None,
    foldin_ratio: float = DEFAULT_FOLDIN_RATIO,
    seed: Optional[int] = 0,
) -> StrongSplit:
    if not 0.0 < foldin_ratio < 1.0:
        raise ValueError("foldin_ratio must lie in (0, 1).")
    n_val = default_group_size(m.n_users) if n_val_users is None else n_val_users
    n_test = default_group_size(m.n_users) if n_test_users is None else n_test_users
    if n_val + n_test >= m.n_users:
        raise DataError(
            f"{n_val} validation + {n_test} test users leave no training users out of {m.n_users}."
        )

    rng = np.random.default_rng(seed)
    row_sizes = np.diff(m.matrix.indptr)
    eligible = np.flatnonzero(row_sizes >= 2)
    if len(eligible) < n_val + n_test:
        raise DataError(
            f"Only {len(eligible)} users have 2+ items; cannot form {n_val}+{n_test} held-out users."
        )
    chosen = rng.permutation(eligible)
    val_users = np.sort(chosen[:n_val])
    test_users = np.sort(chosen[n_val : n_val + n_test])
    held = np.zeros(m.n_users, dtype=bool)
    held[val_users] = True
    held[test_users] = True
    train_users = np.flatnonzero(~held)

    train_matrix = m.matrix[train_users]
    train_stamps = None
    if m.timestamps is not None:
        keep = np.repeat(~held, row_sizes)
        train_stamps = m.timestamps[keep]
    train = InteractionMatrix(
        matrix=sp.csr_matrix(train_matrix),
        user_ids=m.user_ids[train_users],
        item_ids=m.item_ids,
        timestamps=train_stamps,
        raw_count=int(train_matrix.nnz),
    )
    groups = {
        "val": _split_rows(m, val_users, foldin_ratio, rng),
        "test": _split_rows(m, test_users, foldin_ratio, rng),
    }
    split = StrongSplit(
        train=train,
        train_users=train_users.astype(np.int64),
        groups=groups,
        seed=seed,
        foldin_ratio=foldin_ratio,
    )
    split.verify()
    return split
