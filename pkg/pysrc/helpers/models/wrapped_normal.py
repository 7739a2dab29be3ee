"""
Wrapped normal distribution on the hyperboloid.

A Gaussian sample in the tangent space at the origin is transported to the mean
and pushed onto the sheet with the exponential map; the density picks up the
change-of-volume factor (sinh(√c r)/(√c r))^(d-1).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from pysrc.errors import DomainError
from pysrc.helpers.geometry import lorentz
from pysrc.helpers.graddiff import ops

LOG_2PI = np.log(2.0 * np.pi)


def _log_density(v, sigma, c: float):
    d = np.shape(ops.values(v))[-1]
    gauss = ops.sum(-0.5 * (v / sigma) ** 2 - ops.log(sigma), axis=-1, keepdims=True)
    gauss = gauss - 0.5 * d * LOG_2PI
    s = np.sqrt(c) * ops.norm(v)
    # sinh(s)/s -> 1 as s -> 0, so the correction vanishes at the mean
    return gauss - (d - 1) * ops.log(ops.sinh(s) / s)


def sample_arrays(mu, sigma, noise, c: float):
    """Reparameterized draw; returns (z, log q(z)) row-wise."""
    v = sigma * noise
    d = np.shape(ops.values(v))[-1]
    o = lorentz.origin(d, c)
    u = lorentz.parallel_transport_lorentz(o, mu, lorentz.lift_to_origin(v), c)
    z = lorentz.lorentz_expmap(mu, u, c)
    return z, _log_density(v, sigma, c)


def logpdf_arrays(mu, sigma, z, c: float):
    d = np.shape(ops.values(z))[-1] - 1
    o = lorentz.origin(d, c)
    u = lorentz.lorentz_logmap(mu, z, c)
    v = lorentz.drop_time(lorentz.parallel_transport_lorentz(mu, o, u, c))
    return _log_density(v, sigma, c)


@dataclass(frozen=True)
class WrappedNormal:
    mean: np.ndarray  # (..., d + 1) on the sheet
    scale: np.ndarray  # (..., d)
    c: float = 1.0

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        scale = np.asarray(self.scale, dtype=np.float64)
        lorentz.check_on_sheet(mean, self.c)
        if np.any(scale <= 0):
            raise DomainError("Wrapped normal scale must be positive.")
        if scale.shape[-1] != mean.shape[-1] - 1:
            raise DomainError("Scale must have one entry per latent dimension.")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "scale", scale)

    @property
    def dim(self) -> int:
        return self.mean.shape[-1] - 1

    @classmethod
    def at_origin(cls, dim: int, scale: float = 1.0, c: float = 1.0) -> "WrappedNormal":
        return cls(lorentz.origin(dim, c), np.full(dim, scale), c)

    @classmethod
    def from_tangent_mean(cls, mean_tangent, scale, c: float = 1.0) -> "WrappedNormal":
        """Mean given as a vector of R^d, placed with exp_o of its lift."""
        mean_tangent = np.asarray(mean_tangent, dtype=np.float64)
        o = lorentz.origin(mean_tangent.shape[-1], c)
        mean = lorentz.lorentz_expmap(o, lorentz.lift_to_origin(mean_tangent), c)
        return cls(mean, np.broadcast_to(np.asarray(scale, dtype=np.float64), mean_tangent.shape), c)


def wrapped_normal_sample(dist: WrappedNormal, noise) -> Tuple[np.ndarray, np.ndarray]:
    noise = np.asarray(noise, dtype=np.float64)
    z, logq = sample_arrays(dist.mean, dist.scale, noise, dist.c)
    return z, logq[..., 0]


def wrapped_normal_logpdf(dist: WrappedNormal, z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    lorentz.check_on_sheet(z, dist.c)
    return logpdf_arrays(dist.mean, dist.scale, z, dist.c)[..., 0]


def integrate_density_2d(
    dist: WrappedNormal, r_max: float = 25.0, n_r: int = 2500, n_theta: int = 256
) -> float:
    """Midpoint-rule integral of the density over the whole 2-d sheet, in polar coordinates around o."""
    if dist.dim != 2:
        raise DomainError("Polar quadrature is only defined for d = 2.")
    c = dist.c
    dr = r_max / n_r
    dtheta = 2.0 * np.pi / n_theta
    r = (np.arange(n_r) + 0.5) * dr
    theta = np.arange(n_theta) * dtheta
    R, TH = np.meshgrid(r, theta, indexing="ij")
    tangent = np.stack([R * np.cos(TH), R * np.sin(TH)], axis=-1).reshape(-1, 2)
    o = lorentz.origin(2, c)
    z = lorentz.lorentz_expmap(o, lorentz.lift_to_origin(tangent), c)
    density = np.exp(logpdf_arrays(dist.mean, dist.scale, z, c)[:, 0]).reshape(R.shape)
    area = np.sinh(np.sqrt(c) * R) / np.sqrt(c)
    return float(np.sum(density * area) * dr * dtheta)


def wrapped_normal_density_grid(dist: WrappedNormal, grid_size: int = 201):
    """Density sampled on a regular grid over the Poincaré disk of radius 1/√c (NaN outside)."""
    if dist.dim != 2:
        raise DomainError("The disk picture is only defined for d = 2.")
    c = dist.c
    radius = 1.0 / np.sqrt(c)
    xs = np.linspace(-radius, radius, grid_size)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    points = np.stack([X, Y], axis=-1).reshape(-1, 2)
    inside = c * np.sum(points**2, axis=-1) < (1.0 - 1e-3) ** 2
    density = np.full(points.shape[0], np.nan)
    z = lorentz.ball_to_hyperboloid(points[inside], c)
    density[inside] = np.exp(logpdf_arrays(dist.mean, dist.scale, z, c)[:, 0])
    return xs, xs.copy(), density.reshape(X.shape)
