from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from pysrc.helpers.models.params import ParamTensor
from pysrc.helpers.optim.adam import AdamConfig, OptimState, adam_step
from pysrc.helpers.optim.radam import radam_step, row_state

DEFAULT_CLIP_NORM = 5.0


@dataclass(frozen=True)
class OptimizerConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = DEFAULT_CLIP_NORM
    per_coordinate_v: bool = False
    pt_approx: bool = False

    @property
    def adam(self) -> AdamConfig:
        return AdamConfig(lr=self.lr, beta1=self.beta1, beta2=self.beta2, eps=self.eps)

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class StepReport:
    accepted: bool
    grad_norm: float
    clipped: bool = False
    rejected: List[str] = field(default_factory=list)


def global_norm(grads: Dict[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


class Optimizer:
    """Adam for Euclidean tensors, Riemannian Adam for ball tensors, chosen by each tensor's space tag."""

    def __init__(self, params: Dict[str, ParamTensor], config: OptimizerConfig):
        self.config = config
        self.states: Dict[str, OptimState] = {}
        for name, p in params.items():
            if p.space.is_manifold:
                self.states[name] = row_state(p.values, config.per_coordinate_v)
            else:
                self.states[name] = OptimState.zeros(p.values.shape)

    def step(self, params: Dict[str, ParamTensor], grads: Dict[str, np.ndarray]) -> StepReport:
        bad = [name for name, g in grads.items() if not np.all(np.isfinite(g))]
        if bad:
            # all tensors step together or not at all
            return StepReport(accepted=False, grad_norm=float("nan"), rejected=bad)

        norm = global_norm(grads)
        clipped = False
        if self.config.clip_norm > 0 and norm > self.config.clip_norm:
            scale = self.config.clip_norm / norm
            grads = {name: g * scale for name, g in grads.items()}
            clipped = True

        for name, p in params.items():
            grad = grads[name]
            state = self.states[name]
            if p.space.is_manifold:
                outcome = radam_step(
                    p.values,
                    grad,
                    state,
                    self.config.adam,
                    p.space.c,
                    per_coordinate_v=self.config.per_coordinate_v,
                    pt_approx=self.config.pt_approx,
                )
            else:
                outcome = adam_step(p.values, grad, state, self.config.adam)
            p.values = outcome.values
            self.states[name] = outcome.state
            p.check()
        return StepReport(accepted=True, grad_norm=norm, clipped=clipped)

    @property
    def t(self) -> int:
        return max((s.t for s in self.states.values()), default=0)

    def state_arrays(self) -> Dict[str, np.ndarray]:
        out: Dict[str, np.ndarray] = {}
        for name, state in self.states.items():
            out[f"{name}.m"] = state.m
            out[f"{name}.v"] = state.v
        return out

    def load_state_arrays(self, arrays: Dict[str, np.ndarray], t: int) -> None:
        for name in self.states:
            self.states[name] = OptimState(
                m=np.array(arrays[f"{name}.m"], dtype=np.float64),
                v=np.array(arrays[f"{name}.v"], dtype=np.float64),
                t=int(t),
            )

    @classmethod
    def from_dict(cls, params: Dict[str, ParamTensor], data: Optional[Dict]) -> "Optimizer":
        return cls(params, OptimizerConfig(**(data or {})))
