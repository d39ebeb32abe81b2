"""Dense float64 tensors with tape-based reverse-mode differentiation.

The tape is a flat Wengert list: every primitive appends one node in
execution order and the backward pass replays the list once in reverse,
accumulating gradients into the inputs. Everything is float64; shapes
are plain numpy shapes. Ops only record when a tape is active and at
least one input requires gradients, so inference runs record nothing.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Sequence

import numpy as np

# Additive mask logit. exp(MASK_NEG - rowmax) underflows to exactly 0.0,
# so masked positions get exactly zero attention weight.
MASK_NEG = -1e30


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class DomainError(ValueError):
    """Argument value lies outside the operation's domain."""


class ContractError(RuntimeError):
    """An API precondition was violated by the caller."""


class Tensor:
    """A dense float64 array plus an optional accumulated gradient."""

    __slots__ = ("data", "grad", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad}{tag})"

    # arithmetic sugar; the module-level functions do the real work
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

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


class Tape:
    """Ordered record of the primitives executed during one forward pass.

    Use as a context manager; ops executed inside record themselves here.
    ``backward`` may run exactly once per tape; a second call is rejected.
    """

    __slots__ = ("_nodes", "_done")

    def __init__(self):
        self._nodes: list[tuple[Tensor, tuple[Tensor, ...], Callable]] = []
        self._done = False

    def __len__(self) -> int:
        return len(self._nodes)

    def __enter__(self) -> "Tape":
        _STACK.append(self)
        return self

    def __exit__(self, *exc) -> None:
        _STACK.pop()

    def backward(self, loss: Tensor) -> None:
        """Propagate d(loss)/d(x) into ``x.grad`` for every recorded input.

        Gradients accumulate (+=) into whatever is already in ``.grad``;
        parameters that never touched the tape keep ``grad is None`` and
        should be read as zero.
        """
        if loss.data.size != 1:
            raise ContractError(f"backward needs a scalar loss, got shape {loss.data.shape}")
        if self._done:
            raise ContractError("backward already ran on this tape; build a fresh tape")
        self._done = True
        loss.grad = np.ones_like(loss.data)
        for out, inputs, backward_fn in reversed(self._nodes):
            if out.grad is None:
                continue
            grads = backward_fn(out.grad)
            for inp, g in zip(inputs, grads):
                if g is None or not inp.requires_grad:
                    continue
                if inp.grad is None:
                    inp.grad = g
                else:
                    inp.grad = inp.grad + g


_STACK: list[Tape | None] = []


def _active() -> Tape | None:
    return _STACK[-1] if _STACK else None


@contextlib.contextmanager
def no_grad():
    """Disable tape recording inside the block (evaluation / finite differences)."""
    _STACK.append(None)
    try:
        yield
    finally:
        _STACK.pop()


def _lift(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def _record(out: Tensor, inputs: tuple[Tensor, ...], backward_fn: Callable) -> Tensor:
    tape = _active()
    if tape is not None and not tape._done and any(i.requires_grad for i in inputs):
        out.requires_grad = True
        tape._nodes.append((out, inputs, backward_fn))
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``g`` down to ``shape``, undoing numpy broadcasting."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# elementwise arithmetic


def add(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    out = Tensor(a.data + b.data)

    def backward(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    return _record(out, (a, b), backward)


def sub(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    out = Tensor(a.data - b.data)

    def backward(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)

    return _record(out, (a, b), backward)


def neg(a) -> Tensor:
    a = _lift(a)
    out = Tensor(-a.data)
    return _record(out, (a,), lambda g: (-g,))


def mul(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    out = Tensor(a.data * b.data)

    def backward(g):
        return _unbroadcast(g * b.data, a.data.shape), _unbroadcast(g * a.data, b.data.shape)

    return _record(out, (a, b), backward)


def matmul(a, b) -> Tensor:
    """Matrix product for 1-d/2-d operands with the numpy @ conventions."""
    a, b = _lift(a), _lift(b)
    if a.ndim not in (1, 2) or b.ndim not in (1, 2):
        raise ShapeError(f"matmul supports 1-d/2-d operands, got {a.shape} @ {b.shape}")
    if a.data.shape[-1] != b.data.shape[0]:
        raise ShapeError(f"matmul: inner dimensions disagree: {a.shape} @ {b.shape}")
    out = Tensor(a.data @ b.data)

    def backward(g):
        if a.ndim == 2 and b.ndim == 2:
            return g @ b.data.T, a.data.T @ g
        if a.ndim == 2 and b.ndim == 1:
            return np.outer(g, b.data), a.data.T @ g
        if a.ndim == 1 and b.ndim == 2:
            return b.data @ g, np.outer(a.data, g)
        return g * b.data, g * a.data

    return _record(out, (a, b), backward)


# ---------------------------------------------------------------------------
# shape manipulation


def reshape(a, shape) -> Tensor:
    a = _lift(a)
    out = Tensor(a.data.reshape(shape))
    return _record(out, (a,), lambda g: (g.reshape(a.data.shape),))


def transpose(a, axes=None) -> Tensor:
    a = _lift(a)
    out = Tensor(np.transpose(a.data, axes))
    if axes is None:
        inv = None
    else:
        inv = np.argsort(axes)
    return _record(out, (a,), lambda g: (np.transpose(g, inv),))


def broadcast_to(a, shape) -> Tensor:
    a = _lift(a)
    out = Tensor(np.broadcast_to(a.data, shape).copy())
    return _record(out, (a,), lambda g: (_unbroadcast(g, a.data.shape),))


def concat(parts: Sequence, axis: int = 0) -> Tensor:
    parts = [_lift(p) for p in parts]
    out = Tensor(np.concatenate([p.data for p in parts], axis=axis))
    sizes = [p.data.shape[axis] for p in parts]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.ascontiguousarray(piece) for piece in np.split(g, splits, axis=axis))

    return _record(out, tuple(parts), backward)


def slice_axis(a, axis: int, start: int, stop: int) -> Tensor:
    a = _lift(a)
    index = tuple(slice(None) if i != axis else slice(start, stop) for i in range(a.ndim))
    out = Tensor(a.data[index].copy())

    def backward(g):
        full = np.zeros_like(a.data)
        full[index] = g
        return (full,)

    return _record(out, (a,), backward)


def take_rows(a, ids) -> Tensor:
    """Row lookup along axis 0 (embedding gather); ids may be any int shape."""
    a = _lift(a)
    ids = np.asarray(ids)
    out = Tensor(np.take(a.data, ids, axis=0))

    def backward(g):
        full = np.zeros_like(a.data)
        np.add.at(full, ids, g)
        return (full,)

    return _record(out, (a,), backward)


# ---------------------------------------------------------------------------
# reductions


def tsum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _lift(a)
    out = Tensor(a.data.sum(axis=axis, keepdims=keepdims))

    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, a.data.shape).copy(),)
        gg = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(gg, a.data.shape).copy(),)

    return _record(out, (a,), backward)


def tmean(a, axis=None) -> Tensor:
    a = _lift(a)
    n = a.data.size if axis is None else a.data.shape[axis]
    return mul(tsum(a, axis=axis), 1.0 / n)


def mean_scalars(parts: Sequence[Tensor]) -> Tensor:
    """Average a list of scalar tensors (batch loss aggregation)."""
    stacked = concat([reshape(p, (1,)) for p in parts], axis=0)
    return mul(tsum(stacked), 1.0 / len(parts))


# ---------------------------------------------------------------------------
# nonlinearities


def sigmoid(a) -> Tensor:
    a = _lift(a)
    x = a.data
    out_data = np.empty_like(x)
    pos = x >= 0
    out_data[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out_data[~pos] = ex / (1.0 + ex)
    out = Tensor(out_data)
    return _record(out, (a,), lambda g: (g * out_data * (1.0 - out_data),))


def tanh(a) -> Tensor:
    a = _lift(a)
    out_data = np.tanh(a.data)
    out = Tensor(out_data)
    return _record(out, (a,), lambda g: (g * (1.0 - out_data * out_data),))


def relu(a) -> Tensor:
    a = _lift(a)
    out = Tensor(np.maximum(a.data, 0.0))
    return _record(out, (a,), lambda g: (g * (a.data > 0),))


def tlog(a) -> Tensor:
    a = _lift(a)
    out = Tensor(np.log(a.data))
    return _record(out, (a,), lambda g: (g / a.data,))


def clamp(a, lo: float | None = None, hi: float | None = None) -> Tensor:
    a = _lift(a)
    out = Tensor(np.clip(a.data, lo, hi))
    passthrough = np.ones_like(a.data, dtype=bool)
    if lo is not None:
        passthrough &= a.data >= lo
    if hi is not None:
        passthrough &= a.data <= hi
    return _record(out, (a,), lambda g: (g * passthrough,))


def softmax(a, axis: int = -1) -> Tensor:
    """Numerically stable softmax along ``axis`` (max-subtraction)."""
    a = _lift(a)
    if a.data.size == 0:
        raise DomainError("softmax of an empty tensor")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(out_data)

    def backward(g):
        dot = (g * out_data).sum(axis=axis, keepdims=True)
        return (out_data * (g - dot),)

    return _record(out, (a,), backward)


def masked_softmax(a, mask: np.ndarray, axis: int = -1) -> Tensor:
    """Softmax over positions where ``mask`` is nonzero; rest get exactly 0.

    ``mask`` is a plain 0/1 array broadcastable to ``a``. A row with no
    unmasked position has no valid distribution and is rejected.
    """
    a = _lift(a)
    if a.data.size == 0:
        raise DomainError("softmax of an empty tensor")
    mask = np.broadcast_to(np.asarray(mask, dtype=np.float64), a.data.shape)
    if np.any(mask.sum(axis=axis) == 0):
        raise ContractError("masked_softmax: a row is fully masked")
    logits = np.where(mask > 0, a.data, MASK_NEG)
    shifted = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(out_data)

    def backward(g):
        dot = (g * out_data).sum(axis=axis, keepdims=True)
        return (out_data * (g - dot),)

    return _record(out, (a,), backward)


def dropout(a, drop_rate: float, training: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout: zero each element w.p. drop_rate, scale the rest.

    Identity when not training or when drop_rate is 0.
    """
    if not 0.0 <= drop_rate < 1.0:
        raise DomainError(f"drop_rate must be in [0, 1), got {drop_rate}")
    a = _lift(a)
    if not training or drop_rate == 0.0:
        return a
    if rng is None:
        raise ContractError("dropout in training mode needs an explicit rng")
    keep = (rng.random(a.data.shape) >= drop_rate) / (1.0 - drop_rate)
    out = Tensor(a.data * keep)
    return _record(out, (a,), lambda g: (g * keep,))
