"""Claim/debate/fact interaction: attention memories, gated fusion, hops.

All functions here work per case on 2-d tensors: claims [k, 2h], the
utterance memory [n, 2h], and the fact memory [z, 2h]. One hop refines
every claim vector by attending over both memories, mixing the two reads
through an elementwise sigmoid gate, and applying self-attention across
claims with a residual connection. Parameters are shared across claims
and across hops, so the hop count never changes the parameter count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import InteractionParams
from .tensor import (
    DomainError,
    Tensor,
    add,
    masked_softmax,
    matmul,
    mul,
    relu,
    reshape,
    sigmoid,
    softmax,
    sub,
    transpose,
)


def debate_to_claim(claims: Tensor, utterance_memory: Tensor, mask: np.ndarray | None = None):
    """Attend each claim over the utterance memory.

    Returns (read vectors [k, 2h], attention [k, n]).
    """
    scores = matmul(claims, transpose(utterance_memory))  # [k, n]
    if mask is None:
        alpha = softmax(scores, axis=1)
    else:
        alpha = masked_softmax(scores, mask, axis=1)
    return matmul(alpha, utterance_memory), alpha


def debate_to_fact(utterance_memory: Tensor, fact_queries: Tensor, mask: np.ndarray | None = None):
    """Extract one representation per fact label from the utterance memory.

    Returns (fact vectors [z, 2h], attention [z, n]). Computed once per
    case: the utterance memory is fixed, hops only rewrite claim vectors.
    """
    scores = matmul(fact_queries, transpose(utterance_memory))  # [z, n]
    if mask is None:
        alpha = softmax(scores, axis=1)
    else:
        alpha = masked_softmax(scores, mask, axis=1)
    return matmul(alpha, utterance_memory), alpha


def build_fact_memory(fact_vectors: Tensor, fact_probs: Tensor) -> Tensor:
    """Scale each fact vector by its recognition probability: [z, 2h]."""
    z = fact_vectors.shape[0]
    return mul(fact_vectors, reshape(fact_probs, (z, 1)))


def fact_to_claim(claims: Tensor, fact_memory: Tensor):
    """Attend each claim over the probability-scaled fact memory.

    Returns (read vectors [k, 2h], attention [k, z]).
    """
    scores = matmul(claims, transpose(fact_memory))  # [k, z]
    alpha = softmax(scores, axis=1)
    return matmul(alpha, fact_memory), alpha


def fuse(claims: Tensor, utterance_read: Tensor, fact_read: Tensor, p: InteractionParams) -> Tensor:
    """Gated mix of the two memory reads added to a transformed claim.

    gate = sigmoid(W_u . u + W_f . f + b); out = relu(W_l . c + b_l)
    + gate * u + (1 - gate) * f, all elementwise per claim row.
    """
    gate_in = matmul(utterance_read, transpose(p.gate_u))
    if p.gate_f is not None:
        gate_in = add(gate_in, matmul(fact_read, transpose(p.gate_f)))
    gate = sigmoid(add(gate_in, p.gate_b))
    transformed = relu(add(matmul(claims, transpose(p.fuse_w)), p.fuse_b))
    mixed = add(mul(gate, utterance_read), mul(sub(1.0, gate), fact_read))
    return add(transformed, mixed)


def across_claim(claims: Tensor):
    """Scaled dot-product self-attention across claims with a residual add.

    Query, key and value are all the claim matrix itself (identity
    projections); scaling is 1/sqrt(2h). Returns (updated [k, 2h],
    attention [k, k]).
    """
    width = claims.shape[1]
    scores = mul(matmul(claims, transpose(claims)), 1.0 / np.sqrt(width))
    alpha = softmax(scores, axis=1)
    return add(claims, matmul(alpha, claims)), alpha


@dataclass
class HopTrace:
    """Attention families produced by one hop (plain arrays)."""

    debate_to_claim: np.ndarray | None  # [k, n]
    fact_to_claim: np.ndarray | None  # [k, z]
    across_claim: np.ndarray | None  # [k, k]


@dataclass
class InteractionTrace:
    hops: list[HopTrace] = field(default_factory=list)

    @property
    def last_debate_to_claim(self) -> np.ndarray | None:
        for hop in reversed(self.hops):
            if hop.debate_to_claim is not None:
                return hop.debate_to_claim
        return None

    @property
    def last_fact_to_claim(self) -> np.ndarray | None:
        for hop in reversed(self.hops):
            if hop.fact_to_claim is not None:
                return hop.fact_to_claim
        return None


def run_hops(
    claims: Tensor,
    utterance_memory: Tensor,
    fact_memory: Tensor | None,
    p: InteractionParams,
    hops: int,
    use_utterance_memory: bool = True,
    use_self_attention: bool = True,
) -> tuple[Tensor, InteractionTrace]:
    """Iterate the interaction block ``hops`` times with shared parameters.

    ``fact_memory=None`` (or disabling the utterance memory) nulls that
    read: the gate then mixes against a zero vector. Returns the final
    claim matrix and the per-hop attention traces.
    """
    if hops < 1:
        raise DomainError(f"hop count must be >= 1, got {hops}")
    k, width = claims.shape
    trace = InteractionTrace()
    current = claims
    for _ in range(hops):
        if use_utterance_memory:
            utterance_read, alpha_d = debate_to_claim(current, utterance_memory)
        else:
            utterance_read, alpha_d = Tensor(np.zeros((k, width))), None
        if fact_memory is not None:
            fact_read, alpha_f = fact_to_claim(current, fact_memory)
        else:
            fact_read, alpha_f = Tensor(np.zeros((k, width))), None
        current = fuse(current, utterance_read, fact_read, p)
        if use_self_attention:
            current, alpha_a = across_claim(current)
        else:
            alpha_a = None
        trace.hops.append(
            HopTrace(
                debate_to_claim=None if alpha_d is None else alpha_d.data.copy(),
                fact_to_claim=None if alpha_f is None else alpha_f.data.copy(),
                across_claim=None if alpha_a is None else alpha_a.data.copy(),
            )
        )
    return current, trace
