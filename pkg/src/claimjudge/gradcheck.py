"""Central finite-difference verification of tape gradients.

Used by the test suite and the ``gradcheck`` CLI verb. The comparison
metric is |analytic - numeric| / (|analytic| + |numeric| + 1e-6); the
1e-6 floor keeps near-zero gradients from amplifying quadrature noise.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tape, Tensor, no_grad


def gradcheck(
    build_loss: Callable[[], Tensor],
    wrt: Sequence[Tensor],
    eps: float = 1e-6,
    sample_per_tensor: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Return the worst relative error between tape and numeric gradients.

    ``build_loss`` must be a deterministic function of the ``.data`` of the
    ``wrt`` tensors and is re-evaluated 2 times per checked element. When
    ``sample_per_tensor`` is given, only that many randomly chosen elements
    of each tensor are probed (the analytic side is always complete).
    """
    for t in wrt:
        t.grad = None
    with Tape() as tape:
        loss = build_loss()
    tape.backward(loss)
    analytic = [t.grad.copy() if t.grad is not None else np.zeros_like(t.data) for t in wrt]

    worst = 0.0
    for t, full_grad in zip(wrt, analytic):
        flat = t.data.reshape(-1)
        grad_flat = full_grad.reshape(-1)
        if sample_per_tensor is None or flat.size <= sample_per_tensor:
            indices = range(flat.size)
        else:
            if rng is None:
                rng = np.random.default_rng(0)
            indices = rng.choice(flat.size, size=sample_per_tensor, replace=False)
        for idx in indices:
            original = flat[idx]
            flat[idx] = original + eps
            with no_grad():
                up = build_loss().item()
            flat[idx] = original - eps
            with no_grad():
                down = build_loss().item()
            flat[idx] = original
            numeric = (up - down) / (2.0 * eps)
            a = grad_flat[idx]
            rel = abs(a - numeric) / (abs(a) + abs(numeric) + 1e-6)
            worst = max(worst, rel)
    return worst
