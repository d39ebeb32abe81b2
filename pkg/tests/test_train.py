"""Training loop: determinism, early stopping, divergence guard, evaluation."""

import numpy as np
import pytest

import claimjudge.training as train_mod
from claimjudge.checkpoint import load_checkpoint, save_checkpoint
from claimjudge.config import TrainConfig
from claimjudge.model import BatchOutput
from claimjudge.synth import synth_generate
from claimjudge.tensor import ContractError, Tensor
from claimjudge.training import (
    TrainingDiverged,
    evaluate,
    evaluate_params,
    kfold_train,
    split_cases,
    train,
)


def test_split_is_seeded_partition():
    cases = synth_generate(seed=1, n_cases=50)
    a = split_cases(cases, seed=3)
    b = split_cases(cases, seed=3)
    c = split_cases(cases, seed=4)
    assert [x.case_id for x in a[0]] == [x.case_id for x in b[0]]
    assert [x.case_id for x in a[0]] != [x.case_id for x in c[0]]
    ids = [x.case_id for part in a for x in part]
    assert sorted(ids) == sorted(x.case_id for x in cases)
    assert len(a[1]) == 5 and len(a[2]) == 5


def test_same_seed_reproduces_loss_curve():
    cases = synth_generate(seed=2, n_cases=60)
    cfg = TrainConfig(epochs=2, seed=7, learning_rate=3e-3)
    r1 = train(cfg, cases)
    r2 = train(cfg, cases)
    assert r1.loss_curve == r2.loss_curve
    assert [r.val_micro_f1 for r in r1.history] == [r.val_micro_f1 for r in r2.history]


def test_divergence_aborts_with_location(monkeypatch):
    cases = synth_generate(seed=3, n_cases=40)
    cfg = TrainConfig(epochs=1, seed=0)

    real_forward = train_mod.forward_batch
    calls = {"n": 0}

    def poisoned(*args, **kwargs):
        out = real_forward(*args, **kwargs)
        calls["n"] += 1
        if calls["n"] == 2:
            return BatchOutput(loss=Tensor(np.nan), judgment_loss=None, fact_loss=None,
                               cases=out.cases)
        return out

    monkeypatch.setattr(train_mod, "forward_batch", poisoned)
    with pytest.raises(TrainingDiverged) as exc:
        train(cfg, cases)
    assert exc.value.epoch == 0
    assert exc.value.batch_index == 1


def test_empty_corpus_rejected():
    with pytest.raises(ContractError, match="empty"):
        train(TrainConfig(), [])


def test_checkpoint_round_trip_reproduces_metrics(small_run, tmp_path):
    result, test_cases = small_run
    report_direct = evaluate_params(result.params, result.config, result.vocab, test_cases)
    path = tmp_path / "rt.npz"
    save_checkpoint(path, result.params, result.config, result.vocab)
    report_loaded = evaluate(path, test_cases)
    assert report_loaded.micro_f1 == report_direct.micro_f1
    assert report_loaded.macro_f1 == report_direct.macro_f1
    assert np.array_equal(report_loaded.confusion, report_direct.confusion)
    assert report_loaded.fact_micro_f1 == report_direct.fact_micro_f1


def test_evaluate_accepts_loaded_checkpoint(small_checkpoint):
    path, test_cases = small_checkpoint
    ckpt = load_checkpoint(path)
    report = evaluate(ckpt, test_cases)
    assert 0.0 <= report.micro_f1 <= 1.0
    assert report.confusion.sum() == sum(len(c.claims) for c in test_cases)


def test_single_task_training_and_checkpoint(tmp_path):
    cases = synth_generate(seed=5, n_cases=50)
    cfg = TrainConfig(epochs=1, seed=0)
    cfg.ablation.single_task = True
    cfg.__post_init__()
    result = train(cfg, cases, checkpoint_path=tmp_path / "single.npz")
    loaded = load_checkpoint(tmp_path / "single.npz")
    assert not any("fact" in n for n, _ in loaded.params.named())
    report = evaluate_params(result.params, cfg, result.vocab, cases[:10])
    assert report.fact_micro_f1 is None


def test_early_stopping_restores_best(monkeypatch):
    cases = synth_generate(seed=6, n_cases=60)
    cfg = TrainConfig(epochs=30, seed=1, patience=2, learning_rate=3e-3)
    result = train(cfg, cases)
    # patience 2 must have cut the run well short of 30 epochs
    assert len(result.history) < 30
    assert result.best_epoch >= 0


def test_kfold_runs(tmp_path):
    cases = synth_generate(seed=7, n_cases=40)
    cfg = TrainConfig(epochs=1, seed=0)
    reports = kfold_train(cfg, cases, folds=2)
    assert len(reports) == 2
    for report in reports:
        assert 0.0 <= report.micro_f1 <= 1.0


def test_ablation_table_has_full_baseline_row():
    cases = synth_generate(seed=12, n_cases=40)
    cfg = TrainConfig(epochs=1, seed=0)
    rows = train_mod.run_ablations(cfg, cases, seeds=(0,))
    assert rows[0].name == "full"
    assert rows[0].rie_percent == 0.0
    assert {r.name for r in rows} == {
        "full", "no_role", "no_utterance_memory", "no_fact_memory", "no_self_attention"
    }


def test_hop_sweep_shape_and_param_count():
    cases = synth_generate(seed=8, n_cases=60)
    cfg = TrainConfig(epochs=1, seed=0)
    rows = train_mod.hop_sweep(cfg, cases, hop_range=range(1, 4))
    assert [r.hops for r in rows] == [1, 2, 3]
    assert len({r.parameter_count for r in rows}) == 1
    assert all(r.train_seconds > 0 for r in rows)


def test_forward_cost_grows_with_hops():
    """More hops means more interaction work per forward pass."""
    import time

    from claimjudge.data import build_vocab, encode_batch
    from claimjudge.model import forward_batch
    from claimjudge.params import init_model_params
    from claimjudge.tensor import no_grad

    cases = synth_generate(seed=9, n_cases=16)
    vocab = build_vocab(cases)

    def median_forward_time(hops):
        cfg = TrainConfig(hops=hops, seed=0)
        params = init_model_params(cfg, len(vocab), np.random.default_rng(0))
        batch = encode_batch(cases, vocab, cfg.limits)
        with no_grad():
            forward_batch(params, cfg, batch)  # warm-up
            times = []
            for _ in range(7):
                start = time.perf_counter()
                forward_batch(params, cfg, batch)
                times.append(time.perf_counter() - start)
        return float(np.median(times))

    assert median_forward_time(6) > median_forward_time(1)
