from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from pysrc.errors import DataError
from pysrc.helpers.curvature.delta import (
    DEFAULT_SAMPLE_SIZE,
    DEFAULT_TRIALS,
    estimate_delta,
)
from pysrc.helpers.curvature.svd import item_embeddings, truncated_svd

DEFAULT_RANK = 100
DELTA_TO_CURVATURE = 0.144


def curvature_from_delta(delta_rel: float) -> float:
    if delta_rel <= 0:
        raise DataError("δ is zero: the embedding is tree-like and c is unbounded.")
    return (DELTA_TO_CURVATURE / delta_rel) ** 2


@dataclass
class DeltaEstimate:
    delta_trials: List[float]
    diam_trials: List[float]
    delta_rel: float
    c: float
    rank: int
    sample_size: int
    trials: int
    seed: Optional[int]
    embedding: str = "VS"
    raw_delta: bool = False
    skipped_trials: List[int] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)
    config_hash: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DeltaEstimate":
        return cls(**data)

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())


def estimate_c(
    matrix,
    rank: int = DEFAULT_RANK,
    sample_size: int = DEFAULT_SAMPLE_SIZE,
    trials: int = DEFAULT_TRIALS,
    seed: Optional[int] = 0,
    embedding: str = "VS",
    raw_delta: bool = False,
    workers: int = 1,
    progress: bool = False,
) -> DeltaEstimate:
    """truncated SVD -> item embeddings -> δ over sampled subsets -> c = (0.144/δ)^2."""
    factors = truncated_svd(matrix, rank, seed=seed)
    points = item_embeddings(factors, embedding)
    stats = estimate_delta(
        points,
        sample_size=sample_size,
        trials=trials,
        seed=seed,
        relative=not raw_delta,
        workers=workers,
        progress=progress,
    )
    delta_rel = stats.delta_rel
    return DeltaEstimate(
        delta_trials=stats.delta_trials,
        diam_trials=stats.diam_trials,
        delta_rel=delta_rel,
        c=curvature_from_delta(delta_rel),
        rank=rank,
        sample_size=stats.sample_size,
        trials=trials,
        seed=seed,
        embedding=embedding,
        raw_delta=raw_delta,
        skipped_trials=stats.skipped_trials,
    )
