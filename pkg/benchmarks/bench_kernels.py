"""Head-to-head timing of the numba and numpy LSTM kernels.

Run:  python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from claimjudge.kernels import lstm_numpy

try:
    from claimjudge.kernels import lstm_numba
except ImportError:
    lstm_numba = None

SIZES = [
    # (batch, steps, input dim, hidden dim)
    (16, 16, 64, 32),
    (64, 16, 64, 32),
    (192, 16, 64, 32),
    (16, 12, 64, 32),
]
REPEATS = 20


def _inputs(rng, B, T, D, H):
    x = rng.normal(size=(T, B, D))
    lengths = rng.integers(max(1, T // 2), T + 1, size=B).astype(np.int64)
    w_x = rng.normal(size=(D, 4 * H)) * 0.1
    w_h = rng.normal(size=(H, 4 * H)) * 0.1
    b = np.zeros(4 * H)
    dh = rng.normal(size=(T, B, H))
    return x, lengths, w_x, w_h, b, dh


def _time(fn, repeats=REPEATS):
    fn()  # warm-up (includes JIT compilation for numba)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def bench_backend(mod, x, lengths, w_x, w_h, b, dh):
    fwd = _time(lambda: mod.lstm_forward(x, lengths, w_x, w_h, b))
    h, c, gi, gf, gg, go = mod.lstm_forward(x, lengths, w_x, w_h, b)
    bwd = _time(lambda: mod.lstm_backward(dh, x, lengths, w_x, w_h, h, c, gi, gf, gg, go))
    return fwd, bwd


def main():
    rng = np.random.default_rng(0)
    print(f"{'B':>5s} {'T':>4s} {'D':>4s} {'H':>4s} | {'numpy fwd':>10s} {'numpy bwd':>10s}"
          f" | {'numba fwd':>10s} {'numba bwd':>10s} | {'speedup':>8s}")
    for B, T, D, H in SIZES:
        args = _inputs(rng, B, T, D, H)
        np_fwd, np_bwd = bench_backend(lstm_numpy, *args)
        if lstm_numba is None:
            print(f"{B:5d} {T:4d} {D:4d} {H:4d} | {np_fwd*1e3:9.2f}ms {np_bwd*1e3:9.2f}ms | numba unavailable")
            continue
        nb_fwd, nb_bwd = bench_backend(lstm_numba, *args)
        speedup = (np_fwd + np_bwd) / (nb_fwd + nb_bwd)
        print(
            f"{B:5d} {T:4d} {D:4d} {H:4d} | {np_fwd*1e3:9.2f}ms {np_bwd*1e3:9.2f}ms"
            f" | {nb_fwd*1e3:9.2f}ms {nb_bwd*1e3:9.2f}ms | {speedup:7.2f}x"
        )


if __name__ == "__main__":
    main()
