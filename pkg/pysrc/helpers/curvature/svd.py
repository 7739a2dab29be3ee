from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from pysrc.errors import DataError

OVERSAMPLING = 10
POWER_ITERATIONS = 2
EMBEDDINGS = ("U", "V", "US", "VS")


@dataclass(frozen=True)
class SvdFactors:
    U: np.ndarray  # users x r
    S: np.ndarray  # r, non-increasing
    V: np.ndarray  # items x r

    @property
    def rank(self) -> int:
        return int(self.S.shape[0])


def _orthonormal(Y: np.ndarray) -> np.ndarray:
    Q, _ = scipy.linalg.qr(Y, mode="economic")
    return Q


def _flip_signs(U: np.ndarray, V: np.ndarray):
    # largest |entry| of every V column made positive, so the factors are seed-stable
    pivots = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[pivots, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, V * signs


def truncated_svd(matrix, rank: int, seed: Optional[int] = 0) -> SvdFactors:
    """Randomized range-finder SVD with oversampling and power iterations."""
    A = sp.csr_matrix(matrix, dtype=np.float64)
    n_rows, n_cols = A.shape
    if rank < 1 or rank > min(n_rows, n_cols):
        raise DataError(f"SVD rank {rank} exceeds matrix dims {A.shape}.")
    if A.nnz == 0:
        raise DataError("Cannot factorize an all-zero matrix.")

    rng = np.random.default_rng(seed)
    width = min(rank + OVERSAMPLING, n_rows, n_cols)
    omega = rng.standard_normal((n_cols, width))

    Q = _orthonormal(A @ omega)
    for _ in range(POWER_ITERATIONS):
        Z = _orthonormal(A.T @ Q)
        Q = _orthonormal(A @ Z)

    B = np.asarray(A.T @ Q).T  # Q^T A, width x n_cols
    U_small, S, Vt = scipy.linalg.svd(B, full_matrices=False)
    U = Q @ U_small[:, :rank]
    V = Vt[:rank].T
    U, V = _flip_signs(U, V)
    return SvdFactors(U=U, S=S[:rank].copy(), V=V)


def item_embeddings(factors: SvdFactors, embedding: str = "VS") -> np.ndarray:
    """Points whose hyperbolicity drives the curvature estimate (rows of V·diag(S) by default)."""
    if embedding == "VS":
        return factors.V * factors.S
    if embedding == "US":
        return factors.U * factors.S
    if embedding == "V":
        return factors.V.copy()
    if embedding == "U":
        return factors.U.copy()
    raise ValueError(f"Unknown embedding '{embedding}', expected one of {EMBEDDINGS}.")
