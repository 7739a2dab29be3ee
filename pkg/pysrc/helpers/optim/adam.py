from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class OptimState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, shape, v_shape=None) -> "OptimState":
        return cls(m=np.zeros(shape), v=np.zeros(shape if v_shape is None else v_shape), t=0)


@dataclass
class StepOutcome:
    values: np.ndarray
    state: OptimState
    accepted: bool = True
    reason: Optional[str] = field(default=None)


def adam_step(values: np.ndarray, grad: np.ndarray, state: OptimState, config: AdamConfig) -> StepOutcome:
    grad = np.asarray(grad, dtype=np.float64)
    if not np.all(np.isfinite(grad)):
        return StepOutcome(values, state, accepted=False, reason="non-finite gradient")
    t = state.t + 1
    m = config.beta1 * state.m + (1.0 - config.beta1) * grad
    v = config.beta2 * state.v + (1.0 - config.beta2) * grad * grad
    m_hat = m / (1.0 - config.beta1**t)
    v_hat = v / (1.0 - config.beta2**t)
    new_values = values - config.lr * m_hat / (np.sqrt(v_hat) + config.eps)
    return StepOutcome(new_values, OptimState(m=m, v=v, t=t))
