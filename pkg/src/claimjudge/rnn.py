"""Recurrent ops on the tape: single LSTM step and fused sequence runs.

``lstm_cell`` is built from tape primitives, so its gradients come from
the primitive rules. ``lstm_sequence`` is the hot path: one tape node for
a whole padded batch, with the forward/backward loops delegated to the
kernels package (numba or numpy, see ``kernels``). Gate order everywhere
is (input, forget, candidate, output) along the 4H axis.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .tensor import (
    ShapeError,
    Tensor,
    _record,
    add,
    concat,
    matmul,
    mul,
    sigmoid,
    slice_axis,
    tanh,
)


def lstm_cell(x: Tensor, h_prev: Tensor, c_prev: Tensor, w_x: Tensor, w_h: Tensor, b: Tensor):
    """One LSTM step. x: [B, D] (or [D]), states [B, H] (or [H]).

    Returns (h, c), both differentiable through the tape.
    """
    if w_x.ndim != 2 or w_h.ndim != 2 or w_x.shape[1] != w_h.shape[1] or w_h.shape[1] != 4 * w_h.shape[0]:
        raise ShapeError(f"inconsistent LSTM parameter shapes: w_x {w_x.shape}, w_h {w_h.shape}")
    if x.shape[-1] != w_x.shape[0]:
        raise ShapeError(f"lstm_cell: input width {x.shape} does not match w_x {w_x.shape}")
    if h_prev.shape[-1] != w_h.shape[0] or c_prev.shape[-1] != w_h.shape[0]:
        raise ShapeError(
            f"lstm_cell: state widths {h_prev.shape}/{c_prev.shape} do not match w_h {w_h.shape}"
        )
    hidden = w_h.shape[0]
    z = add(add(matmul(x, w_x), matmul(h_prev, w_h)), b)
    axis = z.ndim - 1
    i = sigmoid(slice_axis(z, axis, 0, hidden))
    f = sigmoid(slice_axis(z, axis, hidden, 2 * hidden))
    g = tanh(slice_axis(z, axis, 2 * hidden, 3 * hidden))
    o = sigmoid(slice_axis(z, axis, 3 * hidden, 4 * hidden))
    c = add(mul(f, c_prev), mul(i, g))
    h = mul(o, tanh(c))
    return h, c


def _flip_time(arr: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Reverse each sequence of a [T, B, ...] array within its valid prefix."""
    T, B = arr.shape[0], arr.shape[1]
    t_idx = np.arange(T)[:, None]
    src = lengths[None, :] - 1 - t_idx
    valid = src >= 0
    gathered = arr[np.clip(src, 0, T - 1), np.arange(B)[None, :]]
    return np.where(valid[..., None], gathered, 0.0)


def lstm_sequence(
    x: Tensor,
    lengths: np.ndarray,
    w_x: Tensor,
    w_h: Tensor,
    b: Tensor,
    reverse: bool = False,
) -> Tensor:
    """Fused LSTM over a padded batch. x: [B, T, D] -> [B, T, H].

    Starts from zero state. Positions with t >= lengths[b] produce zeros
    and are invisible to gradients. ``reverse=True`` runs right-to-left
    over each valid prefix (the second half of a bidirectional encoder).
    """
    if x.ndim != 3:
        raise ShapeError(f"lstm_sequence expects [B, T, D], got {x.shape}")
    if x.shape[2] != w_x.shape[0]:
        raise ShapeError(f"lstm_sequence: input width {x.shape} does not match w_x {w_x.shape}")
    lengths = np.asarray(lengths, dtype=np.int64)
    x_tbd = np.ascontiguousarray(x.data.transpose(1, 0, 2))
    if reverse:
        x_tbd = np.ascontiguousarray(_flip_time(x_tbd, lengths))
    h, c, gi, gf, gg, go = kernels.lstm_forward(x_tbd, lengths, w_x.data, w_h.data, b.data)
    h_out = _flip_time(h, lengths) if reverse else h
    out = Tensor(np.ascontiguousarray(h_out.transpose(1, 0, 2)))

    def backward(grad):
        g_tbd = np.ascontiguousarray(grad.transpose(1, 0, 2))
        if reverse:
            g_tbd = np.ascontiguousarray(_flip_time(g_tbd, lengths))
        dx, dw_x, dw_h, db = kernels.lstm_backward(
            g_tbd, x_tbd, lengths, w_x.data, w_h.data, h, c, gi, gf, gg, go
        )
        if reverse:
            dx = _flip_time(dx, lengths)
        return dx.transpose(1, 0, 2), dw_x, dw_h, db

    return _record(out, (x, w_x, w_h, b), backward)


def bilstm(x: Tensor, lengths: np.ndarray, fwd, bwd) -> Tensor:
    """Bidirectional LSTM: concatenated forward/backward runs, [B, T, 2H].

    ``fwd`` and ``bwd`` each carry (w_x, w_h, b) tensors.
    """
    left = lstm_sequence(x, lengths, fwd.w_x, fwd.w_h, fwd.b, reverse=False)
    right = lstm_sequence(x, lengths, bwd.w_x, bwd.w_h, bwd.b, reverse=True)
    return concat([left, right], axis=2)
