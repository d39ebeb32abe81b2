"""Full forward pass: batched encoding, per-case interaction, heads, losses.

Encoding is batched across every utterance (and claim) in the batch for
throughput; the interaction block and heads then run per case on exact-size
slices, so padding can never influence attention or losses. A ForwardTrace
per case records every attention family for evaluation, visualization and
the prediction service.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TrainConfig
from .data import JUDGMENT_LABELS, Batch
from .encoders import encode_claims, encode_dialogue, encode_utterances
from .heads import claim_loss, fact_loss, onehot_judgments, predict_facts, predict_judgment, total_loss
from .interaction import InteractionTrace, build_fact_memory, debate_to_fact, run_hops
from .params import ModelParams
from .tensor import Tensor, dropout, mean_scalars, reshape, slice_axis, take_rows


@dataclass
class ForwardTrace:
    """Every attention distribution and probability from one case's forward."""

    utterance_word_attention: list[np.ndarray]  # n arrays, true word lengths
    claim_word_attention: list[np.ndarray]  # k arrays
    debate_to_fact: np.ndarray | None  # [z, n]
    fact_probs: np.ndarray | None  # model probabilities, [z]
    fact_probs_used: np.ndarray | None  # after any overrides, [z]
    interaction: InteractionTrace
    judgment_probs: np.ndarray  # [k, 3]

    @property
    def debate_to_claim(self) -> np.ndarray | None:
        return self.interaction.last_debate_to_claim

    @property
    def fact_to_claim(self) -> np.ndarray | None:
        return self.interaction.last_fact_to_claim

    @property
    def across_claim_per_hop(self) -> list[np.ndarray] | None:
        maps = [h.across_claim for h in self.interaction.hops]
        return None if any(m is None for m in maps) else maps

    def to_jsonable(self) -> dict:
        def listify(arr):
            return None if arr is None else np.asarray(arr).tolist()

        return {
            "utterance_word_attention": [a.tolist() for a in self.utterance_word_attention],
            "claim_word_attention": [a.tolist() for a in self.claim_word_attention],
            "debate_to_claim": listify(self.debate_to_claim),
            "debate_to_fact": listify(self.debate_to_fact),
            "fact_to_claim": listify(self.fact_to_claim),
            "across_claim_per_hop": None
            if self.across_claim_per_hop is None
            else [m.tolist() for m in self.across_claim_per_hop],
            "fact_probs": listify(self.fact_probs),
            "fact_probs_used": listify(self.fact_probs_used),
            "judgment_probs": self.judgment_probs.tolist(),
        }


@dataclass
class CaseOutput:
    case_id: str
    judgment_probs: np.ndarray  # [k, 3]
    predicted_labels: list[str]
    fact_probs: np.ndarray | None
    trace: ForwardTrace


@dataclass
class BatchOutput:
    loss: Tensor | None  # None when the batch carries no gold labels
    judgment_loss: float | None
    fact_loss: float | None
    cases: list[CaseOutput]


def forward_batch(
    params: ModelParams,
    cfg: TrainConfig,
    batch: Batch,
    train: bool = False,
    rng: np.random.Generator | None = None,
    fact_overrides: np.ndarray | None = None,
) -> BatchOutput:
    """Run the model over an encoded batch.

    ``fact_overrides`` is a [z] float array with NaN for "keep the model's
    probability"; it applies to every case in the batch (the service calls
    with single-case batches) and only makes sense at inference time.
    """
    ab = cfg.ablation
    B = batch.size
    N = batch.utt_tokens.shape[1]
    width = 2 * cfg.hidden_dim

    # ---- batched utterance encoding over all real utterances -------------
    utt_rows = [batch.utt_tokens[b, : batch.utt_lengths[b]] for b in range(B)]
    flat_tokens = np.concatenate(utt_rows, axis=0)
    flat_roles = np.concatenate([batch.utt_roles[b, : batch.utt_lengths[b]] for b in range(B)])
    flat_mask = np.concatenate([batch.utt_word_mask[b, : batch.utt_lengths[b]] for b in range(B)])
    flat_wlens = np.concatenate([batch.utt_word_lengths[b, : batch.utt_lengths[b]] for b in range(B)])
    utt_vecs, utt_word_alpha = encode_utterances(
        params.encoder, cfg, flat_tokens, flat_roles, flat_mask, flat_wlens, train, rng
    )

    # regroup the flat rows into [B, N, 2h]; padded slots point at row 0,
    # which the length-aware dialogue LSTM never reads
    offsets = np.zeros(B + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(batch.utt_lengths)
    slot_index = np.zeros((B, N), dtype=np.int64)
    for b in range(B):
        n_b = batch.utt_lengths[b]
        slot_index[b, :n_b] = offsets[b] + np.arange(n_b)
    dialogue_in = reshape(take_rows(utt_vecs, slot_index.reshape(-1)), (B, N, width))
    dialogue = encode_dialogue(params.encoder, dialogue_in, batch.utt_lengths)
    dialogue_flat = reshape(dialogue, (B * N, width))

    # ---- batched claim encoding ------------------------------------------
    claim_rows = [batch.claim_tokens[b, : batch.claim_counts[b]] for b in range(B)]
    flat_claims = np.concatenate(claim_rows, axis=0)
    flat_cmask = np.concatenate([batch.claim_word_mask[b, : batch.claim_counts[b]] for b in range(B)])
    flat_clens = np.concatenate([batch.claim_word_lengths[b, : batch.claim_counts[b]] for b in range(B)])
    claim_vecs, claim_word_alpha = encode_claims(
        params.encoder, cfg, flat_claims, flat_cmask, flat_clens, train, rng
    )
    claim_offsets = np.zeros(B + 1, dtype=np.int64)
    claim_offsets[1:] = np.cumsum(batch.claim_counts)

    # ---- per-case interaction and heads -----------------------------------
    have_labels = batch.judgments is not None
    case_outputs: list[CaseOutput] = []
    case_losses: list[Tensor] = []
    judgment_losses: list[float] = []
    fact_losses: list[float] = []
    for b in range(B):
        n_b = int(batch.utt_lengths[b])
        k_b = int(batch.claim_counts[b])
        memory = slice_axis(dialogue_flat, 0, b * N, b * N + n_b)  # [n, 2h]
        claims_b = slice_axis(claim_vecs, 0, int(claim_offsets[b]), int(claim_offsets[b]) + k_b)

        fact_memory = None
        fact_probs_model = None
        fact_probs_used = None
        alpha_facts = None
        fact_probs_tensor = None
        if ab.fact_task_enabled():
            fact_vecs, alpha_r = debate_to_fact(memory, params.interaction.fact_queries)
            alpha_facts = alpha_r.data.copy()
            head_in = fact_vecs
            if cfg.dropout_classifier_inputs:
                head_in = dropout(head_in, cfg.drop_rate, train, rng)
            fact_probs_tensor = predict_facts(head_in, params.heads)
            fact_probs_model = fact_probs_tensor.data.copy()
            used = fact_probs_tensor
            if fact_overrides is not None:
                keep = np.isnan(fact_overrides)
                merged = np.where(keep, fact_probs_tensor.data, fact_overrides)
                used = Tensor(merged)
            fact_probs_used = used.data.copy()
            if ab.fact_pathway_enabled():
                fact_memory = build_fact_memory(fact_vecs, used)

        final_claims, itrace = run_hops(
            claims_b,
            memory,
            fact_memory,
            params.interaction,
            cfg.hops,
            use_utterance_memory=not ab.no_utterance_memory,
            use_self_attention=not ab.no_self_attention,
        )
        head_claims = final_claims
        if cfg.dropout_classifier_inputs:
            head_claims = dropout(head_claims, cfg.drop_rate, train, rng)
        probs = predict_judgment(head_claims, params.heads)

        trace = ForwardTrace(
            utterance_word_attention=[
                utt_word_alpha.data[offsets[b] + i, : batch.utt_word_lengths[b, i]].copy()
                for i in range(n_b)
            ],
            claim_word_attention=[
                claim_word_alpha.data[claim_offsets[b] + i, : batch.claim_word_lengths[b, i]].copy()
                for i in range(k_b)
            ],
            debate_to_fact=alpha_facts,
            fact_probs=fact_probs_model,
            fact_probs_used=fact_probs_used,
            interaction=itrace,
            judgment_probs=probs.data.copy(),
        )
        case_outputs.append(
            CaseOutput(
                case_id=batch.cases[b].case_id,
                judgment_probs=probs.data.copy(),
                predicted_labels=[JUDGMENT_LABELS[i] for i in probs.data.argmax(axis=1)],
                fact_probs=fact_probs_model,
                trace=trace,
            )
        )

        if have_labels:
            gold = batch.judgments[b, :k_b]
            lc = claim_loss(probs, onehot_judgments(gold))
            lf = None
            if ab.fact_task_enabled():
                # tiny test configs may recognize only the first num_facts labels
                lf = fact_loss(fact_probs_tensor, batch.facts[b, : cfg.num_facts])
                fact_losses.append(lf.item())
            judgment_losses.append(lc.item())
            case_losses.append(total_loss(lc, lf, cfg.fact_loss_weight))

    loss = mean_scalars(case_losses) if case_losses else None
    return BatchOutput(
        loss=loss,
        judgment_loss=float(np.mean(judgment_losses)) if judgment_losses else None,
        fact_loss=float(np.mean(fact_losses)) if fact_losses else None,
        cases=case_outputs,
    )
