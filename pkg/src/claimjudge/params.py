"""Learnable parameter containers, initialization, and (de)serialization glue.

Weight orientation follows the row-vector convention used throughout the
forward code: an input row x is transformed as x @ W.T, so every matrix is
stored [out, in] except LSTM kernels, which keep their [in, 4H] layout.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, is_dataclass

import numpy as np

from .config import TrainConfig
from .tensor import ShapeError, Tensor


@dataclass
class LstmParams:
    w_x: Tensor  # [in, 4H]
    w_h: Tensor  # [H, 4H]
    b: Tensor  # [4H]


@dataclass
class BiLstmParams:
    fwd: LstmParams
    bwd: LstmParams


@dataclass
class EncoderParams:
    word_embedding: Tensor  # [vocab, d], shared by utterance and claim encoders
    role_embedding: Tensor | None  # [4, r]; None when roles are ablated
    utterance_lstm: BiLstmParams  # input d+r (d if no roles), hidden h per direction
    dialogue_lstm: BiLstmParams  # input 2h
    claim_lstm: BiLstmParams  # input d
    utterance_query: Tensor  # [2h], word-attention query over utterances
    claim_query: Tensor  # [2h], word-attention query over claims


@dataclass
class InteractionParams:
    fact_queries: Tensor | None  # [z, 2h], one query per fact label
    gate_u: Tensor  # [2h, 2h]
    gate_f: Tensor | None  # [2h, 2h]; None when the fact side is gone entirely
    gate_b: Tensor  # [2h]
    fuse_w: Tensor  # [2h, 2h]
    fuse_b: Tensor  # [2h]


@dataclass
class HeadParams:
    judgment_w: Tensor  # [3, 2h], shared across claims
    judgment_b: Tensor  # [3]
    fact_w: Tensor | None  # [z, 2h], one row per fact label
    fact_b: Tensor | None  # [z]


@dataclass
class ModelParams:
    encoder: EncoderParams
    interaction: InteractionParams
    heads: HeadParams

    def named(self) -> list[tuple[str, Tensor]]:
        """Flat (name, tensor) list in stable declaration order."""
        out: list[tuple[str, Tensor]] = []
        _walk("", self, out)
        return out

    def parameter_count(self) -> int:
        return sum(t.size for _, t in self.named())


def _walk(prefix: str, node, out: list[tuple[str, Tensor]]) -> None:
    for f in fields(node):
        value = getattr(node, f.name)
        if value is None:
            continue
        name = f"{prefix}{f.name}"
        if isinstance(value, Tensor):
            out.append((name, value))
        elif is_dataclass(value):
            _walk(name + ".", value, out)


# LSTM matrices use the standard U(-1/sqrt(H), 1/sqrt(H)); tighter ranges
# (e.g. +-0.08) attenuate the signal so hard through the two stacked
# encoders that desk-scale models barely train. Embeddings start at unit
# range, attention queries a bit narrower.
EMBEDDING_INIT = 1.0
QUERY_INIT = 0.25


def _uniform(rng: np.random.Generator, shape, scale: float) -> Tensor:
    return Tensor(rng.uniform(-scale, scale, size=shape), requires_grad=True)


def _zeros(shape) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)


def _lstm(rng: np.random.Generator, in_dim: int, hidden: int) -> LstmParams:
    scale = 1.0 / np.sqrt(hidden)
    return LstmParams(
        w_x=_uniform(rng, (in_dim, 4 * hidden), scale),
        w_h=_uniform(rng, (hidden, 4 * hidden), scale),
        b=_zeros(4 * hidden),
    )


def _bilstm(rng: np.random.Generator, in_dim: int, hidden: int) -> BiLstmParams:
    return BiLstmParams(fwd=_lstm(rng, in_dim, hidden), bwd=_lstm(rng, in_dim, hidden))


def _linear(rng: np.random.Generator, out_dim: int, in_dim: int) -> Tensor:
    scale = 1.0 / np.sqrt(in_dim)
    return _uniform(rng, (out_dim, in_dim), scale)


def init_model_params(cfg: TrainConfig, vocab_size: int, rng: np.random.Generator) -> ModelParams:
    """Fresh parameters; LSTM weights U(-1/sqrt(h), 1/sqrt(h)), linear maps
    fan-in scaled, embeddings and queries at the ranges above."""
    d, r, h, z = cfg.embed_dim, cfg.role_dim, cfg.hidden_dim, cfg.num_facts
    ab = cfg.ablation
    utter_in = d if ab.no_role else d + r
    encoder = EncoderParams(
        word_embedding=_uniform(rng, (vocab_size, d), EMBEDDING_INIT),
        role_embedding=None if ab.no_role else _uniform(rng, (4, r), EMBEDDING_INIT),
        utterance_lstm=_bilstm(rng, utter_in, h),
        dialogue_lstm=_bilstm(rng, 2 * h, h),
        claim_lstm=_bilstm(rng, d, h),
        utterance_query=_uniform(rng, (2 * h,), QUERY_INIT),
        claim_query=_uniform(rng, (2 * h,), QUERY_INIT),
    )
    fact_on = ab.fact_task_enabled()
    interaction = InteractionParams(
        fact_queries=_uniform(rng, (z, 2 * h), QUERY_INIT) if fact_on else None,
        gate_u=_linear(rng, 2 * h, 2 * h),
        gate_f=_linear(rng, 2 * h, 2 * h) if fact_on else None,
        gate_b=_zeros(2 * h),
        fuse_w=_linear(rng, 2 * h, 2 * h),
        fuse_b=_zeros(2 * h),
    )
    heads = HeadParams(
        judgment_w=_linear(rng, 3, 2 * h),
        judgment_b=_zeros(3),
        fact_w=_linear(rng, z, 2 * h) if fact_on else None,
        fact_b=_zeros(z) if fact_on else None,
    )
    return ModelParams(encoder=encoder, interaction=interaction, heads=heads)


def params_from_arrays(arrays: dict[str, np.ndarray], cfg: TrainConfig, vocab_size: int) -> ModelParams:
    """Rebuild a ModelParams tree from checkpoint arrays, verifying shapes."""
    params = init_model_params(cfg, vocab_size, np.random.default_rng(0))
    named = dict(params.named())
    if set(named) != set(arrays):
        missing = sorted(set(named) - set(arrays))
        extra = sorted(set(arrays) - set(named))
        raise ShapeError(f"checkpoint/config parameter mismatch: missing={missing} extra={extra}")
    for name, tensor in named.items():
        arr = np.asarray(arrays[name], dtype=np.float64)
        if arr.shape != tensor.data.shape:
            raise ShapeError(f"parameter {name!r}: checkpoint shape {arr.shape} vs expected {tensor.data.shape}")
        tensor.data = arr.copy()
    return params
