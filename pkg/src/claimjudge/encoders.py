"""Hierarchical encoders: word -> utterance -> dialogue, plus claim encoding.

Utterances are encoded in one batched pass over all sequences: the word
embedding of each token is concatenated with its speaker's role embedding,
run through a BiLSTM, and attention-pooled with a learned query into a
single vector per utterance. A second BiLSTM over those vectors yields the
dialogue-level representation of every utterance. Claims use the same word
embedding matrix, their own BiLSTM, and their own pooling query.
"""

from __future__ import annotations

import numpy as np

from .config import TrainConfig
from .params import EncoderParams
from .rnn import bilstm
from .tensor import (
    ContractError,
    Tensor,
    broadcast_to,
    concat,
    dropout,
    masked_softmax,
    reshape,
    take_rows,
    tsum,
)


def _attend_pool(h: Tensor, query: Tensor, mask: np.ndarray):
    """Dot-product attention pooling over axis 1 of [B, L, 2H]."""
    B, L, _ = h.shape
    scores = tsum(h * query, axis=2)  # [B, L]
    alpha = masked_softmax(scores, mask, axis=1)
    pooled = tsum(h * reshape(alpha, (B, L, 1)), axis=1)  # [B, 2H]
    return pooled, alpha


def encode_utterances(
    p: EncoderParams,
    cfg: TrainConfig,
    token_ids: np.ndarray,
    role_ids: np.ndarray,
    word_mask: np.ndarray,
    word_lengths: np.ndarray,
    train: bool = False,
    rng: np.random.Generator | None = None,
):
    """Encode a flat batch of utterances -> (vectors [B, 2h], word attention [B, L]).

    token_ids [B, L], role_ids [B], word_mask [B, L]. Each row must contain
    at least one real token.
    """
    if token_ids.ndim != 2 or token_ids.shape[0] == 0:
        raise ContractError(f"expected a non-empty [B, L] id array, got shape {token_ids.shape}")
    if np.any(word_lengths == 0):
        raise ContractError("an utterance is fully masked (zero real tokens)")
    B, L = token_ids.shape
    emb = take_rows(p.word_embedding, token_ids)  # [B, L, d]
    if cfg.dropout_embeddings:
        emb = dropout(emb, cfg.drop_rate, train, rng)
    if p.role_embedding is not None:
        roles = take_rows(p.role_embedding, role_ids)  # [B, r]
        roles = broadcast_to(reshape(roles, (B, 1, -1)), (B, L, roles.shape[1]))
        emb = concat([emb, roles], axis=2)  # [B, L, d+r]
    h = bilstm(emb, word_lengths, p.utterance_lstm.fwd, p.utterance_lstm.bwd)
    return _attend_pool(h, p.utterance_query, word_mask)


def encode_dialogue(p: EncoderParams, utterance_vectors: Tensor, counts: np.ndarray) -> Tensor:
    """Contextualize utterance vectors across the dialogue: [B, N, 2h] -> [B, N, 2h]."""
    if utterance_vectors.ndim != 3 or utterance_vectors.shape[1] == 0:
        raise ContractError(f"expected [B, N, 2h] with N >= 1, got {utterance_vectors.shape}")
    if np.any(counts == 0):
        raise ContractError("a case has zero utterances")
    return bilstm(utterance_vectors, counts, p.dialogue_lstm.fwd, p.dialogue_lstm.bwd)


def encode_claims(
    p: EncoderParams,
    cfg: TrainConfig,
    token_ids: np.ndarray,
    word_mask: np.ndarray,
    word_lengths: np.ndarray,
    train: bool = False,
    rng: np.random.Generator | None = None,
):
    """Encode a flat batch of claims -> (vectors [B, 2h], word attention [B, Q])."""
    if token_ids.ndim != 2 or token_ids.shape[0] == 0:
        raise ContractError(f"expected a non-empty [B, Q] id array, got shape {token_ids.shape}")
    if np.any(word_lengths == 0):
        raise ContractError("a claim is fully masked (zero real tokens)")
    emb = take_rows(p.word_embedding, token_ids)  # [B, Q, d]
    if cfg.dropout_embeddings:
        emb = dropout(emb, cfg.drop_rate, train, rng)
    h = bilstm(emb, word_lengths, p.claim_lstm.fwd, p.claim_lstm.bwd)
    return _attend_pool(h, p.claim_query, word_mask)
