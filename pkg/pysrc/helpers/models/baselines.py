from __future__ import annotations

from typing import Optional

import numpy as np

from pysrc.helpers.curvature.svd import SvdFactors, truncated_svd
from pysrc.helpers.models.base import RecModel, dense_rows
from pysrc.helpers.models.params import ParamTensor, euclidean


def puresvd_scores(factors: SvdFactors, user_rows) -> np.ndarray:
    """Fold-in by projection: (row · V) Vᵀ."""
    x = dense_rows(user_rows)
    return (x @ factors.V) @ factors.V.T


class PureSVD(RecModel):
    family = "puresvd"
    trainable = False

    @classmethod
    def fit(cls, train_matrix, rank: int, seed: Optional[int] = 0) -> "PureSVD":
        factors = truncated_svd(train_matrix, rank, seed=seed)
        params = {"V": ParamTensor("V", factors.V, euclidean())}
        return cls(train_matrix.shape[1], rank, 0.0, params)

    def score(self, rows) -> np.ndarray:
        x = dense_rows(rows)
        self._check_items(x)
        V = self.params["V"].values
        return (x @ V) @ V.T


class Popularity(RecModel):
    """Scores every item by its interaction count in the training matrix."""

    family = "popularity"
    trainable = False

    @classmethod
    def fit(cls, train_matrix) -> "Popularity":
        counts = np.asarray(train_matrix.sum(axis=0), dtype=np.float64).ravel()
        params = {"counts": ParamTensor("counts", counts, euclidean())}
        return cls(train_matrix.shape[1], 0, 0.0, params)

    def score(self, rows) -> np.ndarray:
        counts = self.params["counts"].values
        return np.tile(counts, (rows.shape[0], 1))
