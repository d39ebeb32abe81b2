"""Training loop, evaluation, ablation harness, and the hop sweep."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import TrainConfig
from .data import Case, Vocabulary, build_vocab, encode_batch
from .metrics import EvalReport, attach_fact_metrics, judgment_report, relative_error_increase
from .model import forward_batch
from .optim import adam_init, adam_step, clip_global_norm, zero_grads
from .params import ModelParams, init_model_params
from .tensor import ContractError, Tape, no_grad


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; carries the epoch/batch where it happened."""

    def __init__(self, epoch: int, batch_index: int, loss: float):
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}, batch {batch_index}")
        self.epoch = epoch
        self.batch_index = batch_index


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_micro_f1: float
    val_macro_f1: float
    val_fact_micro_f1: float | None


@dataclass
class TrainResult:
    params: ModelParams
    config: TrainConfig
    vocab: Vocabulary
    history: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = -1
    best_val_micro_f1: float = 0.0
    checkpoint_path: str | None = None

    @property
    def loss_curve(self) -> list[float]:
        return [r.train_loss for r in self.history]


def split_cases(cases: list[Case], seed: int, val_fraction: float = 0.1,
                test_fraction: float = 0.1):
    """Seeded case-level split into (train, validation, test)."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(cases))
    n_val = int(round(len(cases) * val_fraction))
    n_test = int(round(len(cases) * test_fraction))
    val_idx = order[:n_val]
    test_idx = order[n_val : n_val + n_test]
    train_idx = order[n_val + n_test :]
    pick = lambda idx: [cases[i] for i in idx]
    return pick(train_idx), pick(val_idx), pick(test_idx)


def predict_cases(params: ModelParams, cfg: TrainConfig, vocab: Vocabulary,
                  cases: list[Case], batch_size: int = 32):
    """Inference over cases -> (gold claim ids, predicted claim ids,
    gold facts [n, z], fact probabilities [n, z] or None, case outputs)."""
    gold_j: list[int] = []
    pred_j: list[int] = []
    gold_f: list[np.ndarray] = []
    prob_f: list[np.ndarray] = []
    outputs = []
    with no_grad():
        for start in range(0, len(cases), batch_size):
            chunk = cases[start : start + batch_size]
            batch = encode_batch(chunk, vocab, cfg.limits)
            result = forward_batch(params, cfg, batch, train=False)
            for b, case_out in enumerate(result.cases):
                k_b = int(batch.claim_counts[b])
                if batch.judgments is not None:
                    gold_j.extend(batch.judgments[b, :k_b].tolist())
                pred_j.extend(case_out.judgment_probs.argmax(axis=1).tolist())
                if batch.facts is not None and case_out.fact_probs is not None:
                    gold_f.append(batch.facts[b, : cfg.num_facts])
                    prob_f.append(case_out.fact_probs)
                outputs.append(case_out)
    facts = (np.stack(gold_f), np.stack(prob_f)) if gold_f else None
    return np.array(gold_j), np.array(pred_j), facts, outputs


def evaluate_params(params: ModelParams, cfg: TrainConfig, vocab: Vocabulary,
                    cases: list[Case]) -> EvalReport:
    gold, pred, facts, _ = predict_cases(params, cfg, vocab, cases)
    report = judgment_report(gold, pred)
    if facts is not None:
        attach_fact_metrics(report, facts[0], facts[1])
    return report


def evaluate(checkpoint: Checkpoint | str | Path, cases: list[Case]) -> EvalReport:
    """Evaluate a saved or in-memory checkpoint on labelled cases."""
    if not isinstance(checkpoint, Checkpoint):
        checkpoint = load_checkpoint(checkpoint)
    if len(checkpoint.vocab) != checkpoint.params.encoder.word_embedding.shape[0]:
        raise ContractError("checkpoint vocabulary does not match its embedding table")
    return evaluate_params(checkpoint.params, checkpoint.config, checkpoint.vocab, cases)


def _snapshot(params: ModelParams) -> dict[str, np.ndarray]:
    return {name: t.data.copy() for name, t in params.named()}


def _restore(params: ModelParams, snapshot: dict[str, np.ndarray]) -> None:
    for name, t in params.named():
        t.data = snapshot[name].copy()


def train(
    cfg: TrainConfig,
    cases: list[Case],
    val_cases: list[Case] | None = None,
    checkpoint_path: str | Path | None = None,
    log=None,
) -> TrainResult:
    """Train on ``cases`` (pre-split train set when ``val_cases`` is given,
    else split internally), early-stopping on validation micro F1.

    Deterministic for a fixed config: the seed drives the split, the
    parameter init, batch shuffling and dropout. The best-validation
    parameters are restored at the end and optionally saved.
    """
    if not cases:
        raise ContractError("empty training corpus")
    if val_cases is None:
        cases, val_cases, _ = split_cases(cases, cfg.seed, cfg.val_fraction, cfg.test_fraction)
    seeds = np.random.SeedSequence(cfg.seed).spawn(3)
    init_rng = np.random.default_rng(seeds[0])
    shuffle_rng = np.random.default_rng(seeds[1])
    dropout_rng = np.random.default_rng(seeds[2])

    vocab = build_vocab(cases, cfg.vocab_min_count)
    params = init_model_params(cfg, len(vocab), init_rng)
    named = params.named()
    state = adam_init(named, cfg.learning_rate)

    result = TrainResult(params=params, config=cfg, vocab=vocab)
    best: dict[str, np.ndarray] | None = None
    stale = 0
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(len(cases))
        epoch_losses = []
        for bi, start in enumerate(range(0, len(order), cfg.batch_size)):
            chunk = [cases[i] for i in order[start : start + cfg.batch_size]]
            batch = encode_batch(chunk, vocab, cfg.limits)
            zero_grads(named)
            with Tape() as tape:
                out = forward_batch(params, cfg, batch, train=True, rng=dropout_rng)
            loss_value = out.loss.item()
            if not np.isfinite(loss_value):
                raise TrainingDiverged(epoch, bi, loss_value)
            tape.backward(out.loss)
            clip_global_norm(named, cfg.clip_norm)
            adam_step(named, state)
            epoch_losses.append(loss_value)

        val = evaluate_params(params, cfg, vocab, val_cases) if val_cases else None
        record = EpochRecord(
            epoch=epoch,
            train_loss=float(np.mean(epoch_losses)),
            val_micro_f1=val.micro_f1 if val else 0.0,
            val_macro_f1=val.macro_f1 if val else 0.0,
            val_fact_micro_f1=val.fact_micro_f1 if val else None,
        )
        result.history.append(record)
        if log:
            log(
                f"epoch {epoch:3d}  loss {record.train_loss:.4f}"
                f"  val micro F1 {record.val_micro_f1:.4f}  macro F1 {record.val_macro_f1:.4f}"
            )
        if val is None:
            continue
        # ties go to the later epoch: the auxiliary task keeps improving
        # after the main-task metric saturates
        if best is None or val.micro_f1 >= result.best_val_micro_f1:
            if val.micro_f1 > result.best_val_micro_f1 or best is None:
                stale = 0
            else:
                stale += 1
            result.best_val_micro_f1 = val.micro_f1
            result.best_epoch = epoch
            best = _snapshot(params)
        else:
            stale += 1
        if stale > cfg.patience:
            break

    if best is not None:
        _restore(params, best)
    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, params, cfg, vocab)
        result.checkpoint_path = str(checkpoint_path)
    return result


ABLATION_NAMES = ("full", "no_role", "no_utterance_memory", "no_fact_memory", "no_self_attention")


def _with_ablation(cfg: TrainConfig, name: str) -> TrainConfig:
    cfg = TrainConfig.from_dict(cfg.to_dict())
    if name != "full":
        setattr(cfg.ablation, name, True)
    return cfg


@dataclass
class AblationRow:
    name: str
    micro_f1: float  # median over seeds
    macro_f1: float
    rie_percent: float  # relative error increase vs the full model, macro F1
    per_seed_micro: list[float] = field(default_factory=list)


def run_ablations(cfg: TrainConfig, cases: list[Case], seeds=(0, 1, 2), log=None) -> list[AblationRow]:
    """Train the full model and four single-component removals on identical
    splits/seeds; report median micro/macro F1 and the relative error
    increase RIE = (F1_full - F1_ablated) / (1 - F1_full) on macro F1."""
    micro: dict[str, list[float]] = {n: [] for n in ABLATION_NAMES}
    macro: dict[str, list[float]] = {n: [] for n in ABLATION_NAMES}
    for seed in seeds:
        train_c, val_c, test_c = split_cases(cases, seed, cfg.val_fraction, cfg.test_fraction)
        for name in ABLATION_NAMES:
            run_cfg = _with_ablation(cfg, name)
            run_cfg.seed = seed
            result = train(run_cfg, train_c, val_cases=val_c)
            report = evaluate_params(result.params, run_cfg, result.vocab, test_c)
            micro[name].append(report.micro_f1)
            macro[name].append(report.macro_f1)
            if log:
                log(f"seed {seed}  {name:22s}  micro F1 {report.micro_f1:.4f}  macro F1 {report.macro_f1:.4f}")
    full_macro = float(np.median(macro["full"]))
    rows = []
    for name in ABLATION_NAMES:
        med_macro = float(np.median(macro[name]))
        rows.append(
            AblationRow(
                name=name,
                micro_f1=float(np.median(micro[name])),
                macro_f1=med_macro,
                rie_percent=100.0 * relative_error_increase(full_macro, med_macro),
                per_seed_micro=micro[name],
            )
        )
    return rows


@dataclass
class HopRow:
    hops: int
    micro_f1: float
    macro_f1: float
    parameter_count: int
    train_seconds: float


def hop_sweep(cfg: TrainConfig, cases: list[Case], hop_range=range(1, 7), log=None) -> list[HopRow]:
    """Train/evaluate one model per hop count on a shared split."""
    train_c, val_c, test_c = split_cases(cases, cfg.seed, cfg.val_fraction, cfg.test_fraction)
    rows = []
    for hops in hop_range:
        run_cfg = TrainConfig.from_dict(cfg.to_dict())
        run_cfg.hops = hops
        started = time.perf_counter()
        result = train(run_cfg, train_c, val_cases=val_c)
        elapsed = time.perf_counter() - started
        report = evaluate_params(result.params, run_cfg, result.vocab, test_c)
        rows.append(
            HopRow(
                hops=hops,
                micro_f1=report.micro_f1,
                macro_f1=report.macro_f1,
                parameter_count=result.params.parameter_count(),
                train_seconds=elapsed,
            )
        )
        if log:
            log(f"hops {hops}  micro F1 {report.micro_f1:.4f}  macro F1 {report.macro_f1:.4f}")
    return rows


def kfold_train(cfg: TrainConfig, cases: list[Case], folds: int, log=None) -> list[EvalReport]:
    """K-fold cross-validation; fold i is the held-out evaluation set."""
    if folds < 2:
        raise ContractError(f"kfold needs >= 2 folds, got {folds}")
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(cases))
    chunks = np.array_split(order, folds)
    reports = []
    for fi, held in enumerate(chunks):
        held_set = set(held.tolist())
        train_c = [cases[i] for i in order if i not in held_set]
        test_c = [cases[i] for i in held]
        result = train(cfg, train_c, val_cases=test_c)
        reports.append(evaluate_params(result.params, cfg, result.vocab, test_c))
        if log:
            log(f"fold {fi}: micro F1 {reports[-1].micro_f1:.4f}")
    return reports
