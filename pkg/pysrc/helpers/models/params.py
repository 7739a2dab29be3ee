from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from pysrc.errors import DomainError, NumericalError
from pysrc.helpers.geometry import poincare

EUCLIDEAN = "euclidean"
MANIFOLD_BALL = "manifold_ball"


@dataclass(frozen=True)
class Space:
    kind: str = EUCLIDEAN
    c: float = 0.0

    @property
    def is_manifold(self) -> bool:
        return self.kind == MANIFOLD_BALL

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "c": self.c}

    @classmethod
    def from_dict(cls, data: Dict) -> "Space":
        return cls(kind=data["kind"], c=float(data["c"]))


def euclidean() -> Space:
    return Space(EUCLIDEAN, 0.0)


def manifold_ball(c: float) -> Space:
    if c < 0:
        raise DomainError(f"Ball curvature must be >= 0, got {c}.")
    return Space(MANIFOLD_BALL, float(c))


@dataclass
class ParamTensor:
    """A dense parameter plus the space it lives in; the tag picks the optimizer."""

    name: str
    values: np.ndarray
    space: Space = Space()

    def __post_init__(self):
        self.values = np.array(self.values, dtype=np.float64)
        self.check()

    def check(self) -> None:
        if not np.all(np.isfinite(self.values)):
            raise NumericalError(f"Parameter '{self.name}' has non-finite entries.")
        if self.space.is_manifold and self.space.c > 0:
            rows = np.atleast_2d(self.values)
            sq = np.sum(rows * rows, axis=-1)
            bound = poincare.max_norm(self.space.c) ** 2
            if np.any(sq > bound * (1.0 + 1e-9)):
                raise DomainError(f"Parameter '{self.name}' has rows outside the ball.")

    def copy(self, values: Optional[np.ndarray] = None) -> "ParamTensor":
        return ParamTensor(self.name, self.values.copy() if values is None else values, self.space)


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    scale = np.sqrt(2.0 / (fan_in + fan_out))
    return rng.normal(0.0, scale, size=(fan_in, fan_out))
