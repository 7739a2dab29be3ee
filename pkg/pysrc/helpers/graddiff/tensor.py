"""
Reverse-mode gradient engine with whole-array nodes.

A ``Tensor`` wraps a float64 array plus the rule that maps the gradient of its
value back onto its parents. Tensors created while a ``Tape`` is active are
recorded in creation order, which is already a topological order, so the
backward pass is a single reversed sweep over the tape.
"""
from __future__ import annotations

import threading
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from pysrc.errors import NumericalError, TapeStateError, UnsupportedOpError

ArrayLike = Union[np.ndarray, float, int]
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

SUPPORTED_OPS = frozenset(
    {
        "leaf",
        "add",
        "sub",
        "mul",
        "div",
        "neg",
        "pow",
        "matmul",
        "sum",
        "tanh",
        "artanh",
        "arccosh",
        "arcsinh",
        "sinh",
        "cosh",
        "exp",
        "log",
        "sqrt",
        "clip",
        "where",
        "concat",
        "getitem",
        "bce_with_logits",
    }
)

_local = threading.local()


def _active_tape() -> Optional["Tape"]:
    stack = getattr(_local, "stack", None)
    if not stack:
        return None
    return stack[-1]


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def value_of(x: Union["Tensor", ArrayLike]) -> np.ndarray:
    if isinstance(x, Tensor):
        return x.value
    return np.asarray(x, dtype=np.float64)


class Tensor:
    __slots__ = ("value", "op", "parents", "backward_fn", "name", "kink")
    # ndarray binary operators defer to the Tensor reflected methods.
    __array_ufunc__ = None

    def __init__(
        self,
        value: ArrayLike,
        op: str = "leaf",
        parents: Tuple["Tensor", ...] = (),
        backward_fn: Optional[BackwardFn] = None,
        name: Optional[str] = None,
        kink: bool = False,
    ):
        if op not in SUPPORTED_OPS:
            raise UnsupportedOpError(f"Unsupported op kind: {op}")
        value = np.asarray(value, dtype=np.float64)
        if not np.all(np.isfinite(value)):
            raise NumericalError(f"Non-finite value produced by op '{op}'.")
        self.value = value
        self.op = op
        self.parents = parents
        self.backward_fn = backward_fn
        self.name = name
        self.kink = kink
        tape = _active_tape()
        if tape is not None:
            tape.record(self)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    def __repr__(self) -> str:
        return f"Tensor(op={self.op}, shape={self.shape})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent: float):
        return power(self, exponent)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __getitem__(self, index):
        return getitem(self, index)


class Tape:
    """Records the nodes of one forward pass on the current thread."""

    def __init__(self):
        self.nodes: List[Tensor] = []
        self.leaves: Dict[str, Tensor] = {}
        self.output: Optional[Tensor] = None
        self.completed = False

    def __enter__(self) -> "Tape":
        stack = getattr(_local, "stack", None)
        if stack is None:
            stack = []
            _local.stack = stack
        stack.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _local.stack.pop()

    def record(self, node: Tensor) -> None:
        self.nodes.append(node)

    def leaf(self, value: ArrayLike, name: str) -> Tensor:
        if name in self.leaves:
            raise TapeStateError(f"Duplicate input name: {name}")
        node = Tensor(np.array(value, dtype=np.float64), name=name)
        self.leaves[name] = node
        return node

    @property
    def has_active_kink(self) -> bool:
        return any(node.kink for node in self.nodes)


def _node(op: str, value: np.ndarray, parents, backward_fn: BackwardFn, kink: bool = False):
    tensor_parents = tuple(p for p in parents if isinstance(p, Tensor))
    if not tensor_parents:
        return value
    return Tensor(value, op=op, parents=tuple(parents), backward_fn=backward_fn, kink=kink)


def forward(
    fn: Callable[..., Tensor], inputs: Dict[str, ArrayLike]
) -> Tuple[Tensor, Tape]:
    """Run ``fn(**inputs)`` with every input promoted to a recorded leaf."""
    tape = Tape()
    with tape:
        leaves = {name: tape.leaf(value, name) for name, value in inputs.items()}
        out = fn(**leaves)
    if not isinstance(out, Tensor):
        raise UnsupportedOpError(
            "Graph output is not connected to its inputs through supported ops."
        )
    tape.output = out
    tape.completed = True
    return out, tape


def backward(tape: Tape, seed: ArrayLike = 1.0) -> Dict[str, np.ndarray]:
    if not tape.completed or tape.output is None:
        raise TapeStateError("backward() called before forward() completed.")
    grads: Dict[int, np.ndarray] = {
        id(tape.output): np.broadcast_to(
            np.asarray(seed, dtype=np.float64), tape.output.shape
        ).copy()
    }
    for node in reversed(tape.nodes):
        grad = grads.pop(id(node), None)
        if grad is None or node.backward_fn is None:
            if node.op == "leaf" and grad is not None:
                grads[id(node)] = grad
            continue
        parent_grads = node.backward_fn(grad)
        for parent, pgrad in zip(node.parents, parent_grads):
            if not isinstance(parent, Tensor) or pgrad is None:
                continue
            pgrad = _unbroadcast(np.asarray(pgrad, dtype=np.float64), parent.shape)
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pgrad
            else:
                grads[key] = pgrad
    out: Dict[str, np.ndarray] = {}
    for name, leaf in tape.leaves.items():
        g = grads.get(id(leaf))
        g = np.zeros_like(leaf.value) if g is None else g
        g.setflags(write=False)
        out[name] = g
    return out


# --- primitive ops -------------------------------------------------------


def add(a, b):
    av, bv = value_of(a), value_of(b)
    return _node("add", av + bv, (a, b), lambda g: (g, g))


def sub(a, b):
    av, bv = value_of(a), value_of(b)
    return _node("sub", av - bv, (a, b), lambda g: (g, -g))


def mul(a, b):
    av, bv = value_of(a), value_of(b)
    return _node("mul", av * bv, (a, b), lambda g: (g * bv, g * av))


def div(a, b):
    av, bv = value_of(a), value_of(b)
    out = av / bv
    return _node("div", out, (a, b), lambda g: (g / bv, -g * out / bv))


def neg(a):
    return _node("neg", -value_of(a), (a,), lambda g: (-g,))


def power(a, exponent: float):
    av = value_of(a)
    return _node(
        "pow",
        av**exponent,
        (a,),
        lambda g: (g * exponent * av ** (exponent - 1),),
    )


def matmul(a, b):
    av, bv = value_of(a), value_of(b)

    def bwd(g):
        ga = g @ np.swapaxes(bv, -1, -2) if bv.ndim > 1 else np.outer(g, bv)
        gb = np.swapaxes(av, -1, -2) @ g if av.ndim > 1 else np.outer(av, g)
        return ga, gb

    return _node("matmul", av @ bv, (a, b), bwd)


def reduce_sum(a, axis=None, keepdims: bool = False):
    av = value_of(a)
    out = av.sum(axis=axis, keepdims=keepdims)

    def bwd(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, av.shape),)

    return _node("sum", out, (a,), bwd)


def tanh(a):
    out = np.tanh(value_of(a))
    return _node("tanh", out, (a,), lambda g: (g * (1.0 - out * out),))


def artanh(a):
    av = value_of(a)
    return _node("artanh", np.arctanh(av), (a,), lambda g: (g / (1.0 - av * av),))


def arccosh(a):
    av = value_of(a)
    denom = np.sqrt(np.maximum(av * av - 1.0, 1e-30))
    return _node("arccosh", np.arccosh(av), (a,), lambda g: (g / denom,))


def arcsinh(a):
    av = value_of(a)
    return _node(
        "arcsinh", np.arcsinh(av), (a,), lambda g: (g / np.sqrt(av * av + 1.0),)
    )


def sinh(a):
    av = value_of(a)
    return _node("sinh", np.sinh(av), (a,), lambda g: (g * np.cosh(av),))


def cosh(a):
    av = value_of(a)
    return _node("cosh", np.cosh(av), (a,), lambda g: (g * np.sinh(av),))


def exp(a):
    out = np.exp(value_of(a))
    return _node("exp", out, (a,), lambda g: (g * out,))


def log(a):
    av = value_of(a)
    return _node("log", np.log(av), (a,), lambda g: (g / av,))


def sqrt(a):
    out = np.sqrt(value_of(a))
    return _node("sqrt", out, (a,), lambda g: (g / (2.0 * out),))


def clip(a, lo: Optional[float] = None, hi: Optional[float] = None, kink: bool = False):
    """Clamp with a zero gradient wherever the clamp is active."""
    av = value_of(a)
    out = np.clip(av, lo, hi)
    inside = np.ones_like(av, dtype=bool)
    if lo is not None:
        inside &= av >= lo
    if hi is not None:
        inside &= av <= hi
    return _node(
        "clip",
        out,
        (a,),
        lambda g: (np.where(inside, g, 0.0),),
        kink=kink and not bool(np.all(inside)),
    )


def where(cond: np.ndarray, a, b, kink: bool = False):
    cond = np.asarray(cond, dtype=bool)
    av, bv = value_of(a), value_of(b)
    out = np.where(cond, av, bv)
    return _node(
        "where",
        out,
        (a, b),
        lambda g: (np.where(cond, g, 0.0), np.where(cond, 0.0, g)),
        kink=kink and bool(np.any(cond)),
    )


def concat(parts: Sequence, axis: int = -1):
    values = [value_of(p) for p in parts]
    out = np.concatenate(values, axis=axis)
    sizes = [v.shape[axis] for v in values]
    bounds = np.cumsum([0] + sizes)

    def bwd(g):
        return tuple(
            np.take(g, np.arange(bounds[i], bounds[i + 1]), axis=axis)
            for i in range(len(values))
        )

    return _node("concat", out, tuple(parts), bwd)


def _is_basic_index(index) -> bool:
    items = index if isinstance(index, tuple) else (index,)
    return all(
        isinstance(i, (slice, int, type(Ellipsis), type(None))) for i in items
    )


def getitem(a, index):
    av = value_of(a)
    basic = _is_basic_index(index)

    def bwd(g):
        full = np.zeros_like(av)
        if basic:
            full[index] = g
        else:
            np.add.at(full, index, g)
        return (full,)

    return _node("getitem", av[index], (a,), bwd)


def bce_with_logits(logits, targets: np.ndarray, clamp: float = 40.0):
    """Mean binary cross-entropy over the last axis, averaged over leading rows."""
    lv = value_of(logits)
    t = np.asarray(targets, dtype=np.float64)
    inside = np.abs(lv) <= clamp
    lc = np.clip(lv, -clamp, clamp)
    # log(1 + exp(-|l|)) keeps the logit form stable at both ends.
    per_item = np.maximum(lc, 0.0) - lc * t + np.log1p(np.exp(-np.abs(lc)))
    n_items = lv.shape[-1]
    n_rows = max(1, lv.size // max(1, n_items))
    loss = per_item.mean(axis=-1).mean() if lv.ndim > 1 else per_item.mean()

    def bwd(g):
        sig = 1.0 / (1.0 + np.exp(-lc))
        grad = (sig - t) / (n_items * n_rows)
        return (np.where(inside, g * grad, 0.0),)

    return _node("bce_with_logits", np.asarray(loss), (logits,), bwd)
