"""
Split artifact directory:

    split.json        metadata, seeds, group memberships, run config
    train.csr         little-endian int64 [n_rows, n_cols, nnz, indptr, indices]
    train.ts          little-endian float64 timestamps aligned with train indices (optional)
    users.txt         raw user id of every train row, one per line
    items.txt         raw item id of every column, one per line
    negatives.tsv     weak only: user <TAB> negative item indices
    <group>_foldin.csr / <group>_heldout.csr   strong only
"""
from __future__ import annotations

import json
import os
from typing import Any, Dict, Optional, Union

import numpy as np
import scipy.sparse as sp

from pysrc.errors import DataError
from pysrc.helpers.recdata.loading import InteractionMatrix
from pysrc.helpers.recdata.splitting import EvalGroup, StrongSplit, WeakSplit

SPLIT_JSON = "split.json"
TRAIN_CSR = "train.csr"
TRAIN_TS = "train.ts"
NEGATIVES_TSV = "negatives.tsv"
USER_IDS = "users.txt"
ITEM_IDS = "items.txt"

Split = Union[WeakSplit, StrongSplit]


def write_csr(path: str, matrix: sp.csr_matrix) -> None:
    m = sp.csr_matrix(matrix)
    n_rows, n_cols = m.shape
    header = np.array([n_rows, n_cols, m.nnz], dtype="<i8")
    with open(path, "wb") as f:
        f.write(header.tobytes())
        f.write(np.asarray(m.indptr, dtype="<i8").tobytes())
        f.write(np.asarray(m.indices, dtype="<i8").tobytes())


def read_csr(path: str) -> sp.csr_matrix:
    if not os.path.isfile(path):
        raise DataError(f"Missing sparse matrix file: {path}")
    raw = np.fromfile(path, dtype="<i8")
    if raw.size < 3:
        raise DataError(f"Truncated sparse matrix file: {path}")
    n_rows, n_cols, nnz = (int(v) for v in raw[:3])
    if raw.size != 3 + n_rows + 1 + nnz:
        raise DataError(f"Sparse matrix file {path} does not match its header.")
    indptr = raw[3 : 4 + n_rows].astype(np.int64)
    indices = raw[4 + n_rows :].astype(np.int64)
    return sp.csr_matrix((np.ones(nnz), indices, indptr), shape=(n_rows, n_cols))


def _write_json(path: str, data: Dict[str, Any]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)


def _write_ids(path: str, ids) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.writelines(f"{v}\n" for v in ids)


def _read_ids(path: str, expected: int) -> np.ndarray:
    if not os.path.isfile(path):
        raise DataError(f"Missing id file: {path}")
    with open(path, "r", encoding="utf-8") as f:
        ids = [line.rstrip("\n") for line in f]
    if len(ids) != expected:
        raise DataError(f"{path} lists {len(ids)} ids, expected {expected}.")
    return np.asarray(ids, dtype=str)


def save_split(split: Split, out_dir: str, config: Optional[Dict[str, Any]] = None, config_hash: Optional[str] = None) -> None:
    os.makedirs(out_dir, exist_ok=True)
    train = split.train
    write_csr(os.path.join(out_dir, TRAIN_CSR), train.matrix)
    if train.timestamps is not None:
        np.asarray(train.timestamps, dtype="<f8").tofile(os.path.join(out_dir, TRAIN_TS))
    _write_ids(os.path.join(out_dir, USER_IDS), train.user_ids)
    _write_ids(os.path.join(out_dir, ITEM_IDS), train.item_ids)

    meta: Dict[str, Any] = {
        "protocol": split.protocol,
        "seed": split.seed,
        "n_users": int(train.n_users),
        "n_items": int(train.n_items),
        "config": config or {},
        "config_hash": config_hash,
    }
    if isinstance(split, WeakSplit):
        meta.update(
            n_negatives=split.n_negatives,
            holdout=split.holdout,
            users=[int(u) for u in split.users],
            test_items=[int(i) for i in split.test_items],
            shortfall={str(u): int(n) for u, n in split.shortfall.items()},
            excluded_users=int(split.excluded_users),
        )
        with open(os.path.join(out_dir, NEGATIVES_TSV), "w", encoding="utf-8") as f:
            for user, negs in zip(split.users, split.negatives):
                f.write("\t".join([str(int(user))] + [str(int(i)) for i in negs]) + "\n")
    else:
        meta.update(
            foldin_ratio=split.foldin_ratio,
            train_users=[int(u) for u in split.train_users],
            groups={name: [int(u) for u in g.users] for name, g in split.groups.items()},
        )
        for name, group in split.groups.items():
            write_csr(os.path.join(out_dir, f"{name}_foldin.csr"), group.foldin)
            write_csr(os.path.join(out_dir, f"{name}_heldout.csr"), group.heldout)
    _write_json(os.path.join(out_dir, SPLIT_JSON), meta)


def read_split_meta(split_dir: str) -> Dict[str, Any]:
    path = os.path.join(split_dir, SPLIT_JSON)
    if not os.path.isfile(path):
        raise DataError(f"No split found at {split_dir} (missing {SPLIT_JSON}).")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def _load_train(split_dir: str) -> InteractionMatrix:
    matrix = read_csr(os.path.join(split_dir, TRAIN_CSR))
    ts_path = os.path.join(split_dir, TRAIN_TS)
    stamps = np.fromfile(ts_path, dtype="<f8").astype(np.float64) if os.path.isfile(ts_path) else None
    if stamps is not None and stamps.size != matrix.nnz:
        raise DataError(f"{ts_path} does not match {TRAIN_CSR}.")
    return InteractionMatrix(
        matrix=matrix,
        user_ids=_read_ids(os.path.join(split_dir, USER_IDS), matrix.shape[0]),
        item_ids=_read_ids(os.path.join(split_dir, ITEM_IDS), matrix.shape[1]),
        timestamps=stamps,
        raw_count=int(matrix.nnz),
    )


def load_split(split_dir: str) -> Split:
    meta = read_split_meta(split_dir)
    train = _load_train(split_dir)
    if meta["protocol"] == "weak":
        negatives = []
        neg_path = os.path.join(split_dir, NEGATIVES_TSV)
        if not os.path.isfile(neg_path):
            raise DataError(f"Missing {NEGATIVES_TSV} in {split_dir}.")
        with open(neg_path, "r", encoding="utf-8") as f:
            for line in f:
                fields = line.rstrip("\n").split("\t")
                negatives.append(np.asarray([int(v) for v in fields[1:]], dtype=np.int64))
        split: Split = WeakSplit(
            train=train,
            users=np.asarray(meta["users"], dtype=np.int64),
            test_items=np.asarray(meta["test_items"], dtype=np.int64),
            negatives=negatives,
            seed=meta["seed"],
            n_negatives=meta["n_negatives"],
            holdout=meta["holdout"],
            shortfall={int(u): int(n) for u, n in meta["shortfall"].items()},
            excluded_users=meta["excluded_users"],
        )
    elif meta["protocol"] == "strong":
        groups = {
            name: EvalGroup(
                users=np.asarray(users, dtype=np.int64),
                foldin=read_csr(os.path.join(split_dir, f"{name}_foldin.csr")),
                heldout=read_csr(os.path.join(split_dir, f"{name}_heldout.csr")),
            )
            for name, users in meta["groups"].items()
        }
        split = StrongSplit(
            train=train,
            train_users=np.asarray(meta["train_users"], dtype=np.int64),
            groups=groups,
            seed=meta["seed"],
            foldin_ratio=meta["foldin_ratio"],
        )
    else:
        raise DataError(f"Unknown protocol '{meta['protocol']}' in {split_dir}.")
    split.verify()
    return split
