"""
Poincaré ball kernels of curvature -c.

Every kernel works row-wise over the last axis and accepts numpy arrays or
graddiff tensors. ``c`` is a plain float; ``c == 0`` takes the Euclidean branch.
"""
from __future__ import annotations

import numpy as np

from pysrc.errors import DomainError
from pysrc.helpers.graddiff import ops
from pysrc.helpers.graddiff.ops import MIN_NORM

EPS_BOUNDARY = 1e-3
ARTANH_MAX = 1.0 - 1e-12


def _check_inside(x, c: float) -> None:
    if c <= 0:
        return
    sq = np.sum(ops.values(x) ** 2, axis=-1)
    if np.any(c * sq >= 1.0):
        raise DomainError("Point lies outside the Poincaré ball (c·‖x‖² ≥ 1).")


def max_norm(c: float, eps_boundary: float = EPS_BOUNDARY) -> float:
    if c <= 0:
        return np.inf
    return (1.0 - eps_boundary) / np.sqrt(c)


def conformal_factor(x, c: float):
    _check_inside(x, c)
    if c == 0:
        return 2.0 * np.ones(np.shape(ops.values(x))[:-1] + (1,))
    return 2.0 / (1.0 - c * ops.sq_norm(x))


def _artanh(x):
    return ops.artanh(ops.clip(x, -ARTANH_MAX, ARTANH_MAX))


def mobius_add(x, y, c: float):
    if c == 0:
        return x + y
    x2 = ops.sq_norm(x)
    y2 = ops.sq_norm(y)
    xy = ops.inner(x, y)
    num = (1.0 + 2.0 * c * xy + c * y2) * x + (1.0 - c * x2) * y
    den = 1.0 + 2.0 * c * xy + c * c * x2 * y2
    return num / ops.clip(den, MIN_NORM, None)


def gyration(a, b, v, c: float):
    """gyr[a, b]v, the rotation that makes Möbius addition associative."""
    if c == 0:
        return v
    a2 = ops.sq_norm(a)
    b2 = ops.sq_norm(b)
    ab = ops.inner(a, b)
    av = ops.inner(a, v)
    bv = ops.inner(b, v)
    c2 = c * c
    coef_a = -c2 * av * b2 + c * bv + 2.0 * c2 * ab * bv
    coef_b = -c2 * bv * a2 - c * av
    den = 1.0 + 2.0 * c * ab + c2 * a2 * b2
    return v + 2.0 * (coef_a * a + coef_b * b) / ops.clip(den, MIN_NORM, None)


def mobius_matvec(weight, x, c: float):
    """M ⊗_c x with M applied as ``x @ weight`` (weight is in_dim × out_dim)."""
    mx = ops.matmul(x, weight)
    if c == 0:
        return mx
    sqrt_c = np.sqrt(c)
    x_norm = ops.norm(x)
    mx_norm = ops.norm(mx)
    scale = ops.tanh(mx_norm / x_norm * _artanh(sqrt_c * x_norm))
    # zero rows of x or of Mx come out as the origin: mx / mx_norm == 0 there.
    return scale * mx / (mx_norm * sqrt_c)


def poincare_distance(x, y, c: float):
    _check_inside(x, c)
    _check_inside(y, c)
    if c == 0:
        # c → 0 limit of the formula below: the metric stays λ² = 4 times Euclidean.
        return 2.0 * ops.norm(x - y)
    diff2 = ops.sq_norm(x - y)
    den = (1.0 - c * ops.sq_norm(x)) * (1.0 - c * ops.sq_norm(y))
    arg = 1.0 + 2.0 * c * diff2 / den
    return ops.arccosh(ops.clip(arg, 1.0, None)) / np.sqrt(c)


def expmap0(v, c: float):
    if c == 0:
        return v
    sqrt_c = np.sqrt(c)
    v_norm = ops.norm(v)
    return ops.tanh(sqrt_c * v_norm) * v / (sqrt_c * v_norm)


def logmap0(y, c: float):
    if c == 0:
        return y
    _check_inside(y, c)
    sqrt_c = np.sqrt(c)
    y_norm = ops.norm(y)
    return _artanh(sqrt_c * y_norm) * y / (sqrt_c * y_norm)


def expmap(x, u, c: float):
    """Exponential map at an arbitrary base point x."""
    if c == 0:
        return x + u
    sqrt_c = np.sqrt(c)
    u_norm = ops.norm(u)
    lam = 2.0 / (1.0 - c * ops.sq_norm(x))
    second = ops.tanh(sqrt_c * lam * u_norm / 2.0) * u / (sqrt_c * u_norm)
    return mobius_add(x, second, c)


def logmap(x, y, c: float):
    if c == 0:
        return y - x
    sqrt_c = np.sqrt(c)
    sub = mobius_add(-x, y, c)
    sub_norm = ops.norm(sub)
    lam = 2.0 / (1.0 - c * ops.sq_norm(x))
    return 2.0 / (sqrt_c * lam) * _artanh(sqrt_c * sub_norm) * sub / sub_norm


def project_to_ball(x, c: float, eps_boundary: float = EPS_BOUNDARY):
    """Clip rows to norm (1/√c)(1 - eps_boundary); identity where already inside."""
    if c == 0:
        return x
    bound = max_norm(c, eps_boundary)
    x_norm = ops.norm(x)
    active = ops.values(x_norm) > bound
    return ops.where(active, x / x_norm * bound, x, kink=True)


def parallel_transport(x, y, v, c: float):
    """Transport a tangent vector at x to y: (λ_x/λ_y)·gyr[y, -x]v."""
    if c == 0:
        return v
    lam_x = 2.0 / (1.0 - c * ops.sq_norm(x))
    lam_y = 2.0 / (1.0 - c * ops.sq_norm(y))
    return gyration(y, -x, v, c) * lam_x / lam_y
