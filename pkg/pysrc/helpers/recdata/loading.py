from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
import scipy.sparse as sp

from pysrc.errors import DataError

FORMATS = {
    "movielens-dat": "::",
    "csv": ",",
    "tsv": "\t",
}
USER_COLUMNS = {"user", "user_id", "userid", "uid", "u"}
ITEM_COLUMNS = {"item", "item_id", "itemid", "iid", "i", "movie", "movie_id", "movieid"}


@dataclass
class InteractionMatrix:
    """Binary user x item matrix with the raw id of every row and column."""

    matrix: sp.csr_matrix
    user_ids: np.ndarray
    item_ids: np.ndarray
    # aligned with matrix.indices; None when the source had no timestamps
    timestamps: Optional[np.ndarray] = None
    raw_count: int = 0
    dropped_users: int = 0

    @property
    def n_users(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_items(self) -> int:
        return self.matrix.shape[1]

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    def row_items(self, user: int) -> np.ndarray:
        m = self.matrix
        return m.indices[m.indptr[user] : m.indptr[user + 1]]

    def row_timestamps(self, user: int) -> Optional[np.ndarray]:
        if self.timestamps is None:
            return None
        m = self.matrix
        return self.timestamps[m.indptr[user] : m.indptr[user + 1]]

    def item_counts(self) -> np.ndarray:
        return np.bincount(self.matrix.indices, minlength=self.n_items)


def _build_csr(rows, cols, values, n_rows: int, n_cols: int, extra=None):
    order = np.lexsort((cols, rows))
    rows, cols, values = rows[order], cols[order], values[order]
    indptr = np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=n_rows))])
    matrix = sp.csr_matrix(
        (values.astype(np.float64), cols.astype(np.int64), indptr.astype(np.int64)),
        shape=(n_rows, n_cols),
    )
    return matrix, (None if extra is None else extra[order])


def from_rows(rows, n_items: int, timestamps=None) -> InteractionMatrix:
    """Build an InteractionMatrix from per-user item lists (ids are the indices)."""
    user_idx = np.concatenate([np.full(len(r), u, dtype=np.int64) for u, r in enumerate(rows)])
    item_idx = np.concatenate([np.asarray(r, dtype=np.int64) for r in rows])
    ts = None if timestamps is None else np.concatenate([np.asarray(t, dtype=np.float64) for t in timestamps])
    matrix, ts = _build_csr(user_idx, item_idx, np.ones(len(item_idx)), len(rows), n_items, ts)
    return InteractionMatrix(
        matrix=matrix,
        user_ids=np.arange(len(rows)).astype(str),
        item_ids=np.arange(n_items).astype(str),
        timestamps=ts,
        raw_count=len(item_idx),
    )


def from_csr(matrix, timestamps=None) -> InteractionMatrix:
    m = sp.csr_matrix(matrix, dtype=np.float64)
    m.sort_indices()
    return InteractionMatrix(
        matrix=m,
        user_ids=np.arange(m.shape[0]).astype(str),
        item_ids=np.arange(m.shape[1]).astype(str),
        timestamps=timestamps,
        raw_count=int(m.nnz),
    )


def _is_numeric(values: pd.Series) -> pd.Series:
    return pd.to_numeric(values, errors="coerce").notna()


def _has_header(df: pd.DataFrame) -> bool:
    user, item = (str(v).strip().lower() for v in df.iloc[0, :2])
    if user in USER_COLUMNS and item in ITEM_COLUMNS:
        return True
    # otherwise a text row followed by numbers in the same column
    first = _is_numeric(df.iloc[0])
    if len(df) == 1:
        return not first.any()
    second = _is_numeric(df.iloc[1])
    return bool((~first & second).any())


def _read_table(path: str, fmt: str) -> pd.DataFrame:
    if fmt not in FORMATS:
        raise DataError(f"Unknown format '{fmt}', expected one of {sorted(FORMATS)}.")
    if not os.path.isfile(path):
        raise DataError(f"Interaction file not found: {path}")
    try:
        df = pd.read_csv(
            path,
            sep=FORMATS[fmt],
            header=None,
            dtype=str,
            engine="python",
            skip_blank_lines=False,
            keep_default_na=False,
            na_values=[""],
        )
    except pd.errors.EmptyDataError:
        raise DataError(f"{path} is empty.")
    except pd.errors.ParserError as e:
        raise DataError(f"Malformed line in {path}: {e}")
    # row position + 1 is the line number from here on
    df.index = np.arange(1, len(df) + 1)
    df = df[~df.isna().all(axis=1)]
    if df.empty:
        raise DataError(f"{path} has no interactions.")
    if df.shape[1] < 2:
        raise DataError(f"Line {df.index[0]} of {path}: expected at least user and item columns.")
    if _has_header(df):
        df = df.iloc[1:]
    return df


def load_interactions(
    path: str,
    fmt: str = "movielens-dat",
    min_user_items: int = 1,
    binarize: bool = True,
    rating_threshold: Optional[float] = None,
) -> InteractionMatrix:
    df = _read_table(path, fmt)
    if df.empty:
        raise DataError(f"{path} has a header but no interactions.")

    n_cols = df.shape[1]
    frame = pd.DataFrame(
        {
            "u": df[0].str.strip(),
            "i": df[1].str.strip(),
        },
        index=df.index,
    )
    frame["r"] = pd.to_numeric(df[2], errors="coerce") if n_cols > 2 else 1.0
    frame["t"] = pd.to_numeric(df[3], errors="coerce") if n_cols > 3 else 0.0

    bad = frame["u"].isna() | frame["i"].isna() | (frame["u"] == "") | (frame["i"] == "")
    bad |= frame["r"].isna() | frame["t"].isna()
    if bad.any():
        line = int(frame.index[bad.to_numpy()][0])
        raise DataError(f"Malformed line {line} in {path}.")

    raw_count = len(frame)
    if rating_threshold is not None:
        frame = frame[frame["r"] >= rating_threshold]
    else:
        frame = frame[frame["r"] > 0]

    grouped = frame.groupby(["u", "i"], sort=False).agg(r=("r", "max"), t=("t", "max")).reset_index()

    counts = grouped.groupby("u", sort=False)["i"].transform("size")
    dropped_users = int(grouped.loc[counts < min_user_items, "u"].nunique())
    grouped = grouped[counts >= min_user_items]
    if grouped.empty:
        raise DataError(f"No interactions left in {path} after filtering.")

    user_idx, user_ids = pd.factorize(grouped["u"])
    item_idx, item_ids = pd.factorize(grouped["i"])
    values = np.ones(len(grouped)) if binarize else grouped["r"].to_numpy(dtype=np.float64)
    matrix, timestamps = _build_csr(
        user_idx.astype(np.int64),
        item_idx.astype(np.int64),
        values,
        len(user_ids),
        len(item_ids),
        grouped["t"].to_numpy(dtype=np.float64) if n_cols > 3 else None,
    )
    return InteractionMatrix(
        matrix=matrix,
        user_ids=np.asarray(user_ids, dtype=str),
        item_ids=np.asarray(item_ids, dtype=str),
        timestamps=timestamps,
        raw_count=raw_count,
        dropped_users=dropped_users,
    )
