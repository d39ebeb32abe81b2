"""Numba-jitted LSTM sequence kernels (default path).

Same contract and recurrence as ``lstm_numpy``; explicit loops instead of
masked array expressions. No fastmath: results must be reproducible and
match the fallback to rounding noise.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _sigmoid_scalar(v):
    if v >= 0.0:
        return 1.0 / (1.0 + np.exp(-v))
    e = np.exp(v)
    return e / (1.0 + e)


@njit(cache=True)
def lstm_forward(x, lengths, w_x, w_h, b):
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
        any_active = False
        for bi in range(B):
            if t < lengths[bi]:
                any_active = True
                break
        if not any_active:
            break
        z = np.dot(x[t], w_x) + np.dot(h_prev, w_h)
        for bi in range(B):
            if t >= lengths[bi]:
                continue
            for j in range(H):
                iv = _sigmoid_scalar(z[bi, j] + b[j])
                fv = _sigmoid_scalar(z[bi, H + j] + b[H + j])
                gv = np.tanh(z[bi, 2 * H + j] + b[2 * H + j])
                ov = _sigmoid_scalar(z[bi, 3 * H + j] + b[3 * H + j])
                cv = fv * c_prev[bi, j] + iv * gv
                hv = ov * np.tanh(cv)
                gi[t, bi, j] = iv
                gf[t, bi, j] = fv
                gg[t, bi, j] = gv
                go[t, bi, j] = ov
                c[t, bi, j] = cv
                h[t, bi, j] = hv
                h_prev[bi, j] = hv
                c_prev[bi, j] = cv
    return h, c, gi, gf, gg, go


@njit(cache=True)
def lstm_backward(dh_out, x, lengths, w_x, w_h, h, c, gi, gf, gg, go):
    T, B, D = x.shape
    H = w_h.shape[0]
    dx = np.zeros((T, B, D))
    dw_x = np.zeros(w_x.shape)
    dw_h = np.zeros(w_h.shape)
    db = np.zeros(4 * H)
    dh_rec = np.zeros((B, H))
    dc_rec = np.zeros((B, H))
    w_x_t = np.ascontiguousarray(w_x.T)
    w_h_t = np.ascontiguousarray(w_h.T)
    dz = np.zeros((B, 4 * H))
    for t in range(T - 1, -1, -1):
        any_active = False
        for bi in range(B):
            if t < lengths[bi]:
                any_active = True
                break
        if not any_active:
            continue
        for bi in range(B):
            if t >= lengths[bi]:
                for j in range(4 * H):
                    dz[bi, j] = 0.0
                continue
            for j in range(H):
                dh = dh_out[t, bi, j] + dh_rec[bi, j]
                tc = np.tanh(c[t, bi, j])
                do = dh * tc
                dc = dc_rec[bi, j] + dh * go[t, bi, j] * (1.0 - tc * tc)
                c_prev = c[t - 1, bi, j] if t > 0 else 0.0
                df = dc * c_prev
                di = dc * gg[t, bi, j]
                dg = dc * gi[t, bi, j]
                dz[bi, j] = di * gi[t, bi, j] * (1.0 - gi[t, bi, j])
                dz[bi, H + j] = df * gf[t, bi, j] * (1.0 - gf[t, bi, j])
                dz[bi, 2 * H + j] = dg * (1.0 - gg[t, bi, j] * gg[t, bi, j])
                dz[bi, 3 * H + j] = do * go[t, bi, j] * (1.0 - go[t, bi, j])
                dc_rec[bi, j] = dc * gf[t, bi, j]
        dx[t] = np.dot(dz, w_x_t)
        dh_rec = np.dot(dz, w_h_t)
        for bi in range(B):
            if t >= lengths[bi]:
                continue
            for d in range(D):
                xv = x[t, bi, d]
                for j in range(4 * H):
                    dw_x[d, j] += xv * dz[bi, j]
            if t > 0:
                for hj in range(H):
                    hv = h[t - 1, bi, hj]
                    for j in range(4 * H):
                        dw_h[hj, j] += hv * dz[bi, j]
            for j in range(4 * H):
                db[j] += dz[bi, j]
    return dx, dw_x, dw_h, db
