"""
Gromov δ-hyperbolicity of finite point sets.

For a base point w the Gromov products G_ij = (i|j)_w turn the four-point
condition into a max-min matrix product: δ_w = max_ij ((G ⊗ G)_ij - G_ij).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.spatial.distance import pdist, squareform
from tqdm import tqdm

from pysrc.errors import DataError

DEFAULT_SAMPLE_SIZE = 1500
DEFAULT_TRIALS = 10
SYMMETRY_TOL = 1e-9


def gromov_products(D: np.ndarray, w: int) -> np.ndarray:
    row = D[w]
    return 0.5 * (row[:, None] + row[None, :] - D)


def max_min_product(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """(A ⊗ B)_ij = max_k min(A_ik, B_kj)."""
    n, m = A.shape[0], B.shape[1]
    out = np.full((n, m), -np.inf)
    buf = np.empty((n, m))
    for k in range(A.shape[1]):
        np.minimum(A[:, k, None], B[None, k, :], out=buf)
        np.maximum(out, buf, out=out)
    return out


def _validate_metric(D: np.ndarray) -> None:
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise DataError("Distance matrix must be square.")
    if np.any(D < 0):
        raise DataError("Distance matrix has negative entries.")
    scale = max(1.0, float(D.max(initial=0.0)))
    if not np.allclose(D, D.T, rtol=0.0, atol=SYMMETRY_TOL * scale):
        raise DataError("Distance matrix is not symmetric.")
    if np.any(np.abs(np.diag(D)) > SYMMETRY_TOL * scale):
        raise DataError("Distance matrix has a nonzero diagonal.")


def delta_basepoint(D, w: int = 0) -> float:
    D = np.asarray(D, dtype=np.float64)
    _validate_metric(D)
    G = gromov_products(D, w)
    return float(max(0.0, np.max(max_min_product(G, G) - G)))


@dataclass
class DeltaTrials:
    delta_trials: List[float] = field(default_factory=list)
    diam_trials: List[float] = field(default_factory=list)
    skipped_trials: List[int] = field(default_factory=list)
    sample_size: int = 0
    relative: bool = True

    @property
    def delta_rel(self) -> float:
        if self.relative:
            ratios = [2.0 * d / m for d, m in zip(self.delta_trials, self.diam_trials)]
        else:
            ratios = list(self.delta_trials)
        return float(np.mean(ratios))


def _run_trial(points: np.ndarray, sample_size: int, rng: np.random.Generator):
    n = points.shape[0]
    idx = rng.choice(n, size=min(sample_size, n), replace=False)
    D = squareform(pdist(points[idx], metric="euclidean"))
    diam = float(D.max())
    if diam <= 0:
        return None
    # idx[0] sits at position 0 of the sample
    return delta_basepoint(D, 0), diam


def estimate_delta(
    points,
    sample_size: int = DEFAULT_SAMPLE_SIZE,
    trials: int = DEFAULT_TRIALS,
    seed: Optional[int] = 0,
    relative: bool = True,
    workers: int = 1,
    progress: bool = False,
) -> DeltaTrials:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 4:
        raise DataError("δ estimation needs at least 4 points.")
    if trials < 1:
        raise DataError("δ estimation needs at least one trial.")

    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_trial, points, sample_size, r) for r in rngs]
            outcomes = [f.result() for f in tqdm(futures, desc="δ trials", disable=not progress)]
    else:
        outcomes = [
            _run_trial(points, sample_size, r)
            for r in tqdm(rngs, desc="δ trials", disable=not progress)
        ]

    result = DeltaTrials(sample_size=min(sample_size, points.shape[0]), relative=relative)
    for i, outcome in enumerate(outcomes):
        if outcome is None:
            result.skipped_trials.append(i)
            continue
        result.delta_trials.append(outcome[0])
        result.diam_trials.append(outcome[1])
    if not result.delta_trials:
        raise DataError("Every δ trial was degenerate (all sampled points identical).")
    return result
