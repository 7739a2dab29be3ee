"""
Riemannian Adam for parameters whose rows are points of the Poincaré ball.

Every row is its own manifold point: the gradient is rescaled by the inverse
metric, the step is taken with the exact exponential map and the first moment
is carried to the new point by parallel transport.
"""
from __future__ import annotations

import numpy as np

from pysrc.helpers.geometry import poincare
from pysrc.helpers.optim.adam import AdamConfig, OptimState, StepOutcome


def row_state(values: np.ndarray, per_coordinate_v: bool = False) -> OptimState:
    if per_coordinate_v:
        return OptimState.zeros(values.shape)
    return OptimState.zeros(values.shape, values.shape[:-1] + (1,))


def transport_momentum(m, src, dst, c: float, approx: bool = False) -> np.ndarray:
    """Move a tangent vector at src to dst; approx keeps only the conformal ratio λ_src/λ_dst."""
    if approx:
        lam_src = poincare.conformal_factor(src, c)
        lam_dst = poincare.conformal_factor(dst, c)
        return m * lam_src / lam_dst
    return poincare.parallel_transport(src, dst, m, c)


def radam_step(
    values: np.ndarray,
    egrad: np.ndarray,
    state: OptimState,
    config: AdamConfig,
    c: float,
    per_coordinate_v: bool = False,
    pt_approx: bool = False,
) -> StepOutcome:
    egrad = np.asarray(egrad, dtype=np.float64)
    if not np.all(np.isfinite(egrad)):
        return StepOutcome(values, state, accepted=False, reason="non-finite gradient")

    lam = poincare.conformal_factor(values, c)
    rgrad = egrad / (lam * lam)
    t = state.t + 1
    m = config.beta1 * state.m + (1.0 - config.beta1) * rgrad
    if per_coordinate_v:
        sq = lam * lam * rgrad * rgrad
    else:
        # squared Riemannian norm of the row: λ²‖rgrad‖²
        sq = lam * lam * np.sum(rgrad * rgrad, axis=-1, keepdims=True)
    v = config.beta2 * state.v + (1.0 - config.beta2) * sq
    m_hat = m / (1.0 - config.beta1**t)
    v_hat = v / (1.0 - config.beta2**t)
    direction = -config.lr * m_hat / (np.sqrt(v_hat) + config.eps)

    new_values = poincare.project_to_ball(poincare.expmap(values, direction, c), c)
    new_m = transport_momentum(m, values, new_values, c, approx=pt_approx)
    return StepOutcome(new_values, OptimState(m=new_m, v=v, t=t))
