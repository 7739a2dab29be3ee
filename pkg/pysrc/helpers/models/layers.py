from __future__ import annotations

from pysrc.helpers.geometry import poincare
from pysrc.helpers.graddiff import ops

BIAS_HYP = "hyp"
BIAS_MOEBIUS = "moebius"
BIAS_MODES = (BIAS_HYP, BIAS_MOEBIUS)


def hyp_linear(W, b, x, c: float, bias_mode: str = BIAS_HYP):
    """project(W ⊗_c x ⊕_c bias); the bias is exp_0(b) for hyp mode and b itself for moebius mode."""
    if bias_mode not in BIAS_MODES:
        raise ValueError(f"Unknown bias mode '{bias_mode}'.")
    bias_point = poincare.expmap0(b, c) if bias_mode == BIAS_HYP else b
    out = poincare.mobius_add(poincare.mobius_matvec(W, x, c), bias_point, c)
    return poincare.project_to_ball(out, c)


def tangent_tanh(x, c: float):
    """tanh applied in the tangent space at the origin."""
    return poincare.expmap0(ops.tanh(poincare.logmap0(x, c)), c)
