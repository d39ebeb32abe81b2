"""Pure-numpy LSTM sequence kernels (fallback path).

Time-major layout [T, B, ...]; gate order along the 4H axis is
(input, forget, candidate, output). Rows with t >= lengths[b] are never
computed: their outputs stay zero and they contribute nothing to any
gradient. The numba twin in ``lstm_numba`` implements the exact same
recurrence; keep the two in lockstep.
"""

from __future__ import annotations

import numpy as np


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_forward(x, lengths, w_x, w_h, b):
    """Run an LSTM left-to-right over a padded batch from zero state.

    x: [T, B, D], lengths: [B] int64, w_x: [D, 4H], w_h: [H, 4H], b: [4H].
    Returns (h, c, gi, gf, gg, go), each [T, B, H]; saved activations feed
    lstm_backward.
    """
    T, B, _ = x.shape
    H = w_h.shape[0]
    h = np.zeros((T, B, H))
    c = np.zeros((T, B, H))
    gi = np.zeros((T, B, H))
    gf = np.zeros((T, B, H))
    gg = np.zeros((T, B, H))
    go = np.zeros((T, B, H))
    h_prev = np.zeros((B, H))
    c_prev = np.zeros((B, H))
    for t in range(T):
        active = t < lengths
        if not active.any():
            break
        z = x[t] @ w_x + h_prev @ w_h + b
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H : 2 * H])
        g = np.tanh(z[:, 2 * H : 3 * H])
        o = _sigmoid(z[:, 3 * H :])
        c_new = f * c_prev + i * g
        h_new = o * np.tanh(c_new)
        am = active[:, None]
        gi[t] = np.where(am, i, 0.0)
        gf[t] = np.where(am, f, 0.0)
        gg[t] = np.where(am, g, 0.0)
        go[t] = np.where(am, o, 0.0)
        c[t] = np.where(am, c_new, 0.0)
        h[t] = np.where(am, h_new, 0.0)
        h_prev = np.where(am, h_new, h_prev)
        c_prev = np.where(am, c_new, c_prev)
    return h, c, gi, gf, gg, go


def lstm_backward(dh_out, x, lengths, w_x, w_h, h, c, gi, gf, gg, go):
    """Gradients of lstm_forward given d(loss)/d(h).

    dh_out: [T, B, H] upstream gradient of every per-step output.
    Returns (dx, dw_x, dw_h, db). Entries of dh_out at padded positions
    are ignored (the forward wrote constants there).
    """
    T, B, D = x.shape
    H = w_h.shape[0]
    dx = np.zeros_like(x)
    dw_x = np.zeros_like(w_x)
    dw_h = np.zeros_like(w_h)
    db = np.zeros_like(w_h[0])
    dh_rec = np.zeros((B, H))
    dc_rec = np.zeros((B, H))
    w_x_t = w_x.T.copy()
    w_h_t = w_h.T.copy()
    for t in range(T - 1, -1, -1):
        active = t < lengths
        if not active.any():
            continue
        am = active[:, None]
        dh = np.where(am, dh_out[t] + dh_rec, 0.0)
        tc = np.tanh(c[t])
        do = dh * tc
        dc = np.where(am, dc_rec + dh * go[t] * (1.0 - tc * tc), 0.0)
        c_prev = c[t - 1] if t > 0 else np.zeros((B, H))
        df = dc * c_prev
        di = dc * gg[t]
        dg = dc * gi[t]
        dz = np.concatenate(
            [
                di * gi[t] * (1.0 - gi[t]),
                df * gf[t] * (1.0 - gf[t]),
                dg * (1.0 - gg[t] * gg[t]),
                do * go[t] * (1.0 - go[t]),
            ],
            axis=1,
        )
        dz = np.where(am, dz, 0.0)
        dx[t] = dz @ w_x_t
        dh_rec = dz @ w_h_t
        dc_rec = dc * gf[t]
        h_prev = h[t - 1] if t > 0 else np.zeros((B, H))
        dw_x += x[t].T @ dz
        dw_h += h_prev.T @ dz
        db += dz.sum(axis=0)
    return dx, dw_x, dw_h, db
