from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from pysrc.helpers.graddiff.tensor import Tensor, backward, forward, value_of


@dataclass
class GradcheckReport:
    tol: float
    h: float
    errors: Dict[str, np.ndarray] = field(default_factory=dict)
    skipped: Optional[str] = None

    @property
    def max_error(self) -> float:
        if not self.errors:
            return 0.0
        return float(max(np.max(e) if e.size else 0.0 for e in self.errors.values()))

    @property
    def passed(self) -> bool:
        return self.skipped is None and self.max_error <= self.tol

    def __str__(self) -> str:
        if self.skipped:
            return f"gradcheck skipped: {self.skipped}"
        status = "pass" if self.passed else "FAIL"
        per_input = ", ".join(
            f"{name}={float(np.max(err)) if err.size else 0.0:.3e}"
            for name, err in self.errors.items()
        )
        return f"gradcheck {status} (tol {self.tol:.1e}): {per_input}"


def _scalar(fn: Callable[..., Tensor], point: Dict[str, np.ndarray]) -> float:
    out = fn(**point)
    value = value_of(out)
    if value.size != 1:
        raise ValueError("gradcheck needs a scalar-valued function.")
    return float(value.reshape(()))


def gradcheck(
    fn: Callable[..., Tensor],
    point: Dict[str, np.ndarray],
    h: float = 1e-5,
    tol: float = 1e-4,
    floor: float = 1e-6,
) -> GradcheckReport:
    """Compare tape gradients of a scalar function against central differences."""
    point = {k: np.array(v, dtype=np.float64) for k, v in point.items()}
    report = GradcheckReport(tol=tol, h=h)
    _, tape = forward(fn, point)
    if tape.has_active_kink:
        report.skipped = "projection active"
        return report
    analytic = backward(tape)

    for name, base in point.items():
        numeric = np.zeros_like(base)
        flat = numeric.reshape(-1)
        for i in range(base.size):
            shifted = {k: v.copy() for k, v in point.items()}
            shifted[name].reshape(-1)[i] += h
            f_plus = _scalar(fn, shifted)
            shifted[name].reshape(-1)[i] -= 2 * h
            f_minus = _scalar(fn, shifted)
            flat[i] = (f_plus - f_minus) / (2 * h)
        a = analytic[name]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(numeric)), floor)
        report.errors[name] = np.abs(a - numeric) / denom
    return report
