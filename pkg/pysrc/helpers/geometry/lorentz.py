"""
Lorentz (hyperboloid) kernels on the sheet c·<x, x>_L = -1.

Coordinates are stored space-first with the time coordinate last, so the origin
is (0, ..., 0, 1/√c). Like the ball kernels these accept arrays or tensors.
"""
from __future__ import annotations

import numpy as np

from pysrc.errors import DomainError
from pysrc.helpers.graddiff import ops
from pysrc.helpers.graddiff.ops import MIN_NORM

SHEET_TOL = 1e-9


def _signs(dim: int) -> np.ndarray:
    signs = np.ones(dim)
    signs[-1] = -1.0
    return signs


def _require_positive(c: float) -> None:
    if c <= 0:
        raise DomainError("The hyperboloid model needs c > 0.")


def lorentz_inner(x, y):
    x_dim = np.shape(ops.values(x))[-1]
    y_dim = np.shape(ops.values(y))[-1]
    if x_dim != y_dim:
        raise DomainError(f"Dimension mismatch: {x_dim} vs {y_dim}.")
    return ops.sum(x * y * _signs(x_dim), axis=-1, keepdims=True)


def lorentz_norm(u):
    """Minkowski norm of a (space-like) tangent vector, clamped away from zero."""
    return ops.sqrt(ops.clip(lorentz_inner(u, u), MIN_NORM * MIN_NORM, None))


def origin(dim: int, c: float) -> np.ndarray:
    """Hyperboloid origin for a d-dimensional space (returned with d + 1 coordinates)."""
    _require_positive(c)
    o = np.zeros(dim + 1)
    o[-1] = 1.0 / np.sqrt(c)
    return o


def sheet_residual(x, c: float) -> np.ndarray:
    xv = ops.values(x)
    inner = np.sum(xv[..., :-1] ** 2, axis=-1) - xv[..., -1] ** 2
    return np.abs(c * inner + 1.0)


def check_on_sheet(x, c: float, tol: float = SHEET_TOL) -> None:
    _require_positive(c)
    xv = ops.values(x)
    # relative to the size of the coordinates; large points lose absolute precision
    scale = np.maximum(1.0, c * xv[..., -1] ** 2)
    if np.any(sheet_residual(xv, c) > tol * scale) or np.any(xv[..., -1] <= 0):
        raise DomainError("Point is not on the upper sheet of the hyperboloid.")


def project_to_sheet(x, c: float):
    """Recompute the time coordinate from the space part."""
    space = x[..., :-1]
    time = ops.sqrt(1.0 / c + ops.sq_norm(space))
    return ops.concat([space, time], axis=-1)


def lift_to_origin(v):
    """Embed a vector of R^d as a tangent vector at the origin (time component 0)."""
    zeros = np.zeros(np.shape(ops.values(v))[:-1] + (1,))
    return ops.concat([v, zeros], axis=-1)


def drop_time(u):
    return u[..., :-1]


def lorentz_distance(x, y, c: float):
    _require_positive(c)
    arg = -c * lorentz_inner(x, y)
    return ops.arccosh(ops.clip(arg, 1.0, None)) / np.sqrt(c)


def lorentz_expmap(mu, u, c: float):
    _require_positive(c)
    sqrt_c = np.sqrt(c)
    scaled = sqrt_c * lorentz_norm(u)
    out = ops.cosh(scaled) * mu + ops.sinh(scaled) * u / scaled
    return project_to_sheet(out, c)


def lorentz_logmap(mu, z, c: float):
    _require_positive(c)
    sqrt_c = np.sqrt(c)
    alpha = ops.clip(-c * lorentz_inner(mu, z), 1.0, None)
    u = z - alpha * mu
    u_norm = lorentz_norm(u)
    # arsinh(√c·‖u‖_L) equals arccosh(alpha) and stays well conditioned near mu.
    dist = ops.arcsinh(sqrt_c * u_norm) / sqrt_c
    return dist * u / u_norm


def parallel_transport_lorentz(a, b, v, c: float):
    """Transport v from the tangent space at a to the tangent space at b."""
    _require_positive(c)
    coef = c * lorentz_inner(b, v) / (1.0 - c * lorentz_inner(a, b))
    return v + coef * (a + b)


def ball_to_hyperboloid(p, c: float):
    _require_positive(c)
    sq = c * ops.sq_norm(p)
    space = 2.0 * p / (1.0 - sq)
    time = (1.0 + sq) / (np.sqrt(c) * (1.0 - sq))
    return ops.concat([space, time], axis=-1)


def hyperboloid_to_ball(x, c: float):
    _require_positive(c)
    return x[..., :-1] / (1.0 + np.sqrt(c) * x[..., -1:])
