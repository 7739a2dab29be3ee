"""
Array functions that accept plain numpy values or recorded ``Tensor`` nodes.

Kernels written against this module run as pure numpy when no argument is a
Tensor, and record onto the active tape otherwise.
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from pysrc.helpers.graddiff import tensor as T
from pysrc.helpers.graddiff.tensor import Tensor, value_of

MIN_NORM = 1e-15


def is_tensor(x) -> bool:
    return isinstance(x, Tensor)


def _any_tensor(*xs) -> bool:
    return any(isinstance(x, Tensor) for x in xs)


def asarray(x):
    if isinstance(x, Tensor):
        return x
    return np.asarray(x, dtype=np.float64)


def sum(x, axis=None, keepdims: bool = False):
    if isinstance(x, Tensor):
        return T.reduce_sum(x, axis=axis, keepdims=keepdims)
    return np.sum(x, axis=axis, keepdims=keepdims)


def tanh(x):
    return T.tanh(x) if isinstance(x, Tensor) else np.tanh(x)


def artanh(x):
    return T.artanh(x) if isinstance(x, Tensor) else np.arctanh(x)


def arccosh(x):
    return T.arccosh(x) if isinstance(x, Tensor) else np.arccosh(x)


def arcsinh(x):
    return T.arcsinh(x) if isinstance(x, Tensor) else np.arcsinh(x)


def sinh(x):
    return T.sinh(x) if isinstance(x, Tensor) else np.sinh(x)


def cosh(x):
    return T.cosh(x) if isinstance(x, Tensor) else np.cosh(x)


def exp(x):
    return T.exp(x) if isinstance(x, Tensor) else np.exp(x)


def log(x):
    return T.log(x) if isinstance(x, Tensor) else np.log(x)


def sqrt(x):
    return T.sqrt(x) if isinstance(x, Tensor) else np.sqrt(x)


def clip(x, lo: Optional[float] = None, hi: Optional[float] = None, kink: bool = False):
    if isinstance(x, Tensor):
        return T.clip(x, lo, hi, kink=kink)
    return np.clip(x, lo, hi)


def where(cond, a, b, kink: bool = False):
    if _any_tensor(a, b):
        return T.where(cond, a, b, kink=kink)
    return np.where(cond, a, b)


def concat(parts: Sequence, axis: int = -1):
    if _any_tensor(*parts):
        return T.concat(parts, axis=axis)
    return np.concatenate([np.asarray(p, dtype=np.float64) for p in parts], axis=axis)


def matmul(a, b):
    if _any_tensor(a, b):
        return T.matmul(a, b)
    return np.asarray(a) @ np.asarray(b)


def sq_norm(x):
    return sum(x * x, axis=-1, keepdims=True)


def norm(x):
    """Euclidean norm over the last axis, clamped away from zero."""
    return sqrt(clip(sq_norm(x), MIN_NORM * MIN_NORM, None))


def inner(x, y):
    return sum(x * y, axis=-1, keepdims=True)


def values(x) -> np.ndarray:
    return value_of(x)
