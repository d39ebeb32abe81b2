"""Prediction heads and losses: per-claim judgment softmax, per-fact sigmoid."""

from __future__ import annotations

import numpy as np

from .params import HeadParams
from .tensor import (
    ContractError,
    Tensor,
    add,
    clamp,
    matmul,
    mul,
    neg,
    sigmoid,
    softmax,
    sub,
    tlog,
    transpose,
    tsum,
)

PROB_FLOOR = 1e-12  # probability clamp before any log


def predict_judgment(claims: Tensor, p: HeadParams) -> Tensor:
    """Per-claim probabilities over (reject, partially_support, support): [k, 3]."""
    logits = add(matmul(claims, transpose(p.judgment_w)), p.judgment_b)
    return softmax(logits, axis=1)


def claim_loss(probs: Tensor, onehot: np.ndarray) -> Tensor:
    """Mean cross-entropy over the case's claims; targets must be one-hot."""
    onehot = np.asarray(onehot, dtype=np.float64)
    if probs.shape != onehot.shape:
        raise ContractError(f"probs {probs.shape} vs targets {onehot.shape}")
    rows_ok = np.all(np.isin(onehot, (0.0, 1.0))) and np.all(onehot.sum(axis=1) == 1.0)
    if not rows_ok:
        raise ContractError("judgment targets must be one-hot rows")
    k = onehot.shape[0]
    logs = tlog(clamp(probs, PROB_FLOOR, 1.0))
    return mul(neg(tsum(mul(logs, Tensor(onehot)))), 1.0 / k)


def predict_facts(fact_vectors: Tensor, p: HeadParams) -> Tensor:
    """Per-fact recognition probabilities in (0, 1): [z]."""
    if p.fact_w is None or p.fact_b is None:
        raise ContractError("fact head is disabled in this configuration")
    scores = add(tsum(mul(fact_vectors, p.fact_w), axis=1), p.fact_b)
    return sigmoid(scores)


def fact_loss(probs: Tensor, targets: np.ndarray) -> Tensor:
    """Mean binary cross-entropy over the fact labels."""
    targets = np.asarray(targets, dtype=np.float64)
    if probs.shape != targets.shape:
        raise ContractError(f"probs {probs.shape} vs targets {targets.shape}")
    z = targets.shape[0]
    t = Tensor(targets)
    pos = mul(t, tlog(clamp(probs, PROB_FLOOR, 1.0)))
    negt = mul(sub(1.0, t), tlog(clamp(sub(1.0, probs), PROB_FLOOR, 1.0)))
    return mul(neg(tsum(add(pos, negt))), 1.0 / z)


def total_loss(judgment_loss: Tensor, fact_loss_term: Tensor | None, fact_weight: float = 1.0) -> Tensor:
    """Unweighted sum by default; the fact weight is a knob that stays at 1."""
    if fact_loss_term is None:
        return judgment_loss
    if fact_weight == 1.0:
        return add(judgment_loss, fact_loss_term)
    return add(judgment_loss, mul(fact_loss_term, fact_weight))


def onehot_judgments(label_ids: np.ndarray, n_classes: int = 3) -> np.ndarray:
    out = np.zeros((len(label_ids), n_classes))
    out[np.arange(len(label_ids)), label_ids] = 1.0
    return out
