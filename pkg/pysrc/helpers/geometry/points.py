"""
Typed points on the two models plus the operations that take them.

The array kernels in ``poincare`` and ``lorentz`` do the math; the types here
carry the curvature along and check the model constraints on construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from pysrc.errors import DomainError
from pysrc.helpers.geometry import lorentz, poincare

BALL = "ball"
HYPERBOLOID = "hyperboloid"
TANGENT_TOL = 1e-9


@dataclass(frozen=True)
class Curvature:
    c: float
    eps_boundary: float = poincare.EPS_BOUNDARY

    def __post_init__(self):
        if not np.isfinite(self.c) or self.c < 0:
            raise DomainError(f"Curvature must be a finite c >= 0, got {self.c}.")
        if not 0.0 < self.eps_boundary < 1.0:
            raise DomainError("eps_boundary must lie in (0, 1).")

    @property
    def K(self) -> float:
        return -self.c

    @property
    def is_euclidean(self) -> bool:
        return self.c == 0

    @property
    def max_norm(self) -> float:
        return poincare.max_norm(self.c, self.eps_boundary)


def _coords(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DomainError("Point coordinates must be a 1-D vector.")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BallPoint:
    coords: np.ndarray
    curvature: Curvature = field(default_factory=lambda: Curvature(1.0))

    def __post_init__(self):
        object.__setattr__(self, "coords", _coords(self.coords))
        c = self.curvature.c
        if c > 0 and c * float(self.coords @ self.coords) >= 1.0:
            raise DomainError("Point lies outside the Poincaré ball.")

    @property
    def dim(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True)
class HyperboloidPoint:
    coords: np.ndarray
    curvature: Curvature = field(default_factory=lambda: Curvature(1.0))

    def __post_init__(self):
        object.__setattr__(self, "coords", _coords(self.coords))
        if self.curvature.c <= 0:
            raise DomainError("HyperboloidPoint needs c > 0.")
        lorentz.check_on_sheet(self.coords, self.curvature.c)

    @property
    def dim(self) -> int:
        return self.coords.shape[0] - 1


Point = Union[BallPoint, HyperboloidPoint]


@dataclass(frozen=True)
class TangentVector:
    coords: np.ndarray
    base: Point

    def __post_init__(self):
        object.__setattr__(self, "coords", _coords(self.coords))
        if self.coords.shape != self.base.coords.shape:
            raise DomainError("Tangent vector and base point differ in dimension.")
        if isinstance(self.base, HyperboloidPoint):
            ortho = float(lorentz.lorentz_inner(self.base.coords, self.coords)[0])
            scale = max(1.0, float(np.linalg.norm(self.coords) * np.linalg.norm(self.base.coords)))
            if abs(ortho) > TANGENT_TOL * scale:
                raise DomainError("Vector is not tangent to the hyperboloid at its base.")


def ball_origin(dim: int, curvature: Curvature) -> BallPoint:
    return BallPoint(np.zeros(dim), curvature)


def hyperboloid_origin(dim: int, curvature: Curvature) -> HyperboloidPoint:
    return HyperboloidPoint(lorentz.origin(dim, curvature.c), curvature)


def _same_curvature(*points: Point) -> Curvature:
    first = points[0].curvature
    for p in points[1:]:
        if p.curvature.c != first.c:
            raise DomainError(
                f"Curvature mismatch: {first.c} vs {p.curvature.c}."
            )
    return first


# --- Poincaré ball -------------------------------------------------------


def conformal_factor(x: BallPoint) -> float:
    return float(poincare.conformal_factor(x.coords, x.curvature.c)[0])


def mobius_add(x: BallPoint, y: BallPoint) -> BallPoint:
    k = _same_curvature(x, y)
    out = poincare.mobius_add(x.coords, y.coords, k.c)
    return BallPoint(poincare.project_to_ball(out, k.c, k.eps_boundary), k)


def gyration(a: BallPoint, b: BallPoint, v) -> np.ndarray:
    k = _same_curvature(a, b)
    return poincare.gyration(a.coords, b.coords, np.asarray(v, dtype=np.float64), k.c)


def mobius_matvec(M, x: BallPoint) -> BallPoint:
    """M ⊗_c x for a matrix M of shape (out_dim, dim(x))."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[1] != x.dim:
        raise DomainError(f"Matrix of shape {M.shape} cannot act on a {x.dim}-dim point.")
    k = x.curvature
    out = poincare.mobius_matvec(M.T, x.coords, k.c)
    return BallPoint(poincare.project_to_ball(out, k.c, k.eps_boundary), k)


def poincare_distance(x: BallPoint, y: BallPoint) -> float:
    k = _same_curvature(x, y)
    return float(poincare.poincare_distance(x.coords, y.coords, k.c)[0])


def ball_expmap0(v: TangentVector) -> BallPoint:
    if not isinstance(v.base, BallPoint):
        raise DomainError("ball_expmap0 needs a tangent vector of the ball.")
    k = v.base.curvature
    out = poincare.expmap0(v.coords, k.c)
    return BallPoint(poincare.project_to_ball(out, k.c, k.eps_boundary), k)


def ball_logmap0(y: BallPoint) -> TangentVector:
    k = y.curvature
    return TangentVector(poincare.logmap0(y.coords, k.c), ball_origin(y.dim, k))


def project_to_ball(x, curvature: Curvature) -> BallPoint:
    out = poincare.project_to_ball(np.asarray(x, dtype=np.float64), curvature.c, curvature.eps_boundary)
    return BallPoint(out, curvature)


# --- Lorentz model -------------------------------------------------------


def lorentz_inner(x, y) -> float:
    xv = x.coords if hasattr(x, "coords") else np.asarray(x, dtype=np.float64)
    yv = y.coords if hasattr(y, "coords") else np.asarray(y, dtype=np.float64)
    return float(lorentz.lorentz_inner(xv, yv)[..., 0])


def lorentz_distance(x: HyperboloidPoint, y: HyperboloidPoint) -> float:
    k = _same_curvature(x, y)
    return float(lorentz.lorentz_distance(x.coords, y.coords, k.c)[0])


def lorentz_expmap(mu: HyperboloidPoint, u: TangentVector) -> HyperboloidPoint:
    if u.base is not mu and not np.array_equal(u.base.coords, mu.coords):
        raise DomainError("Tangent vector is attached to a different base point.")
    k = mu.curvature
    return HyperboloidPoint(lorentz.lorentz_expmap(mu.coords, u.coords, k.c), k)


def lorentz_logmap(mu: HyperboloidPoint, z: HyperboloidPoint) -> TangentVector:
    k = _same_curvature(mu, z)
    return TangentVector(lorentz.lorentz_logmap(mu.coords, z.coords, k.c), mu)


def parallel_transport_lorentz(
    src: HyperboloidPoint, dst: HyperboloidPoint, v: TangentVector
) -> TangentVector:
    k = _same_curvature(src, dst)
    out = lorentz.parallel_transport_lorentz(src.coords, dst.coords, v.coords, k.c)
    return TangentVector(out, dst)


def convert(point: Point, target_model: str) -> Point:
    if target_model not in (BALL, HYPERBOLOID):
        raise DomainError(f"Unknown model: {target_model}")
    k = point.curvature
    if isinstance(point, BallPoint):
        if target_model == BALL:
            return point
        return HyperboloidPoint(lorentz.ball_to_hyperboloid(point.coords, k.c), k)
    if target_model == HYPERBOLOID:
        return point
    return BallPoint(lorentz.hyperboloid_to_ball(point.coords, k.c), k)
