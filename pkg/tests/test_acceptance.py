"""Acceptance suite: one test per exit criterion, at the stated tolerances.

Expensive training runs are shared through session fixtures; every test
prints a single PASS/FAIL line with the measured numbers.

Run:  pytest tests/test_acceptance.py -v -s
"""

import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from claimjudge.checkpoint import load_checkpoint, save_checkpoint
from claimjudge.config import Limits, TrainConfig
from claimjudge.data import FACT_LABELS, ROLES, build_vocab, encode_batch
from claimjudge.model import forward_batch
from claimjudge.params import init_model_params
from claimjudge.service import ModelBundle, create_app, find_decisive_flip
from claimjudge.synth import synth_generate
from claimjudge.tensor import no_grad
from claimjudge.testing import (
    composed_model_gradcheck,
    primitive_gradchecks,
    tiny_case,
    tiny_config,
    tiny_vocab,
)
from claimjudge.training import evaluate_params, hop_sweep, run_ablations, train

from reference_model import pack_params, reference_forward

ACCEPT_CORPUS_SEED = 2025
ABLATION_CORPUS_SEED = 11


def _line(name, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"\n[{status}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def _accept_config(**overrides) -> TrainConfig:
    cfg = TrainConfig(epochs=12, learning_rate=3e-3, patience=99)
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


@pytest.fixture(scope="session")
def accept_corpus():
    cases = synth_generate(seed=ACCEPT_CORPUS_SEED, n_cases=2500)
    return cases[:2000], cases[2000:2250], cases[2250:2500]


@pytest.fixture(scope="session")
def mtl_runs(accept_corpus):
    """Multi-task runs for seeds 0..2 on the 2000/250/250 corpus, timed."""
    train_c, val_c, _ = accept_corpus
    runs = {}
    for seed in (0, 1, 2):
        cfg = _accept_config(seed=seed)
        started = time.perf_counter()
        result = train(cfg, train_c, val_cases=val_c)
        runs[seed] = (result, time.perf_counter() - started)
    return runs


@pytest.fixture(scope="session")
def single_task_runs(accept_corpus):
    train_c, val_c, _ = accept_corpus
    runs = {}
    for seed in (0, 1, 2):
        cfg = _accept_config(seed=seed)
        cfg.ablation.single_task = True
        cfg.__post_init__()
        result = train(cfg, train_c, val_cases=val_c)
        runs[seed] = result
    return runs


@pytest.fixture(scope="session")
def mtl_checkpoint(mtl_runs, tmp_path_factory):
    result, _ = mtl_runs[0]
    path = tmp_path_factory.mktemp("accept") / "mtl_seed0.npz"
    save_checkpoint(path, result.params, result.config, result.vocab)
    return path


def test_gradient_integrity():
    """Every primitive and the composed model pass central finite differences."""
    started = time.perf_counter()
    prim = primitive_gradchecks(seeds=100)
    composed = composed_model_gradcheck(seeds=100)
    elapsed = time.perf_counter() - started
    worst_prim = max(prim.values())
    ok = worst_prim < 1e-4 and composed < 1e-4 and elapsed < 60.0
    _line(
        "gradient-integrity",
        ok,
        f"worst primitive {worst_prim:.2e}, composed model {composed:.2e}, "
        f"{len(prim)} primitives x 100 seeds + model x 100 seeds in {elapsed:.1f}s (< 60s)",
    )


def test_equation_fidelity():
    """Straight-line single-file evaluation matches the modular forward."""
    cfg = tiny_config()
    vocab = tiny_vocab()
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        params = init_model_params(cfg, len(vocab), rng)
        case = tiny_case(rng, vocab)
        batch = encode_batch([case], vocab, cfg.limits)
        with no_grad():
            out = forward_batch(params, cfg, batch, train=False)
        trace = out.cases[0].trace

        P = pack_params({n: t.data for n, t in params.named()})
        ref = reference_forward(
            P,
            [vocab.encode(u.tokens) for u in case.utterances],
            [ROLES.index(u.role) for u in case.utterances],
            [vocab.encode(c.tokens) for c in case.claims],
            hops=cfg.hops,
        )

        def diff(a, b):
            return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))

        worst = max(worst, diff(trace.judgment_probs, ref["judgment_probs"]))
        worst = max(worst, diff(trace.fact_probs, ref["fact_probs"]))
        worst = max(worst, diff(trace.debate_to_fact, ref["debate_to_fact"]))
        for i, alpha in enumerate(trace.utterance_word_attention):
            worst = max(worst, diff(alpha, ref["utterance_word_attention"][i]))
        for i, alpha in enumerate(trace.claim_word_attention):
            worst = max(worst, diff(alpha, ref["claim_word_attention"][i]))
        for hop, ref_hop in zip(trace.interaction.hops, ref["hops"]):
            worst = max(worst, diff(hop.debate_to_claim, ref_hop["debate_to_claim"]))
            worst = max(worst, diff(hop.fact_to_claim, ref_hop["fact_to_claim"]))
            worst = max(worst, diff(hop.across_claim, ref_hop["across_claim"]))
    ok = worst < 1e-10
    _line("equation-fidelity", ok, f"50 seeded inputs, worst |diff| {worst:.2e} (< 1e-10)")


def test_attention_stochasticity():
    """All five attention families are row-stochastic; padding never leaks."""
    cases = synth_generate(seed=77, n_cases=100)
    vocab = build_vocab(cases)
    cfg = TrainConfig()
    params = init_model_params(cfg, len(vocab), np.random.default_rng(0))

    worst_sum = 0.0
    batch = encode_batch(cases, vocab, cfg.limits)
    with no_grad():
        out = forward_batch(params, cfg, batch, train=False)
    for case_out in out.cases:
        t = case_out.trace
        rows = list(t.utterance_word_attention) + list(t.claim_word_attention)
        for row in rows:
            worst_sum = max(worst_sum, abs(row.sum() - 1.0))
        worst_sum = max(worst_sum, float(np.abs(t.debate_to_fact.sum(axis=1) - 1).max()))
        for hop in t.interaction.hops:
            for m in (hop.debate_to_claim, hop.fact_to_claim, hop.across_claim):
                worst_sum = max(worst_sum, float(np.abs(m.sum(axis=1) - 1).max()))

    # padding extension: same cases, wider limits
    wide = Limits(max_utterances=28, max_utterance_len=24, max_claims=6, max_claim_len=12)
    batch_wide = encode_batch(cases[:20], vocab, wide)
    batch_tight = encode_batch(cases[:20], vocab, cfg.limits)
    worst_pad = 0.0
    with no_grad():
        out_w = forward_batch(params, cfg, batch_wide, train=False)
        out_t = forward_batch(params, cfg, batch_tight, train=False)
    for a, b in zip(out_w.cases, out_t.cases):
        worst_pad = max(worst_pad, float(np.abs(a.judgment_probs - b.judgment_probs).max()))
        worst_pad = max(worst_pad, float(np.abs(a.fact_probs - b.fact_probs).max()))
        worst_pad = max(
            worst_pad,
            float(np.abs(a.trace.debate_to_claim - b.trace.debate_to_claim).max()),
        )
    ok = worst_sum < 1e-6 and worst_pad < 1e-10
    _line(
        "attention-stochasticity",
        ok,
        f"100-case eval, worst row-sum deviation {worst_sum:.2e} (< 1e-6); "
        f"padding-extension deviation {worst_pad:.2e} (< 1e-10)",
    )


def test_overfit_sanity():
    """20 cases, 200 epochs: training accuracy reaches 0.99 within 5 minutes."""
    cases = synth_generate(seed=55, n_cases=20)
    cfg = _accept_config(epochs=200, seed=0)
    started = time.perf_counter()
    result = train(cfg, cases, val_cases=[])
    elapsed = time.perf_counter() - started
    report = evaluate_params(result.params, cfg, result.vocab, cases)
    ok = report.micro_f1 >= 0.99 and elapsed < 300.0
    _line(
        "overfit-sanity",
        ok,
        f"train claim accuracy {report.micro_f1:.4f} (>= 0.99) after 200 epochs in {elapsed:.0f}s (< 300s)",
    )


def test_learnability(accept_corpus, mtl_runs):
    """2000/250/250 corpus: both tasks reach micro F1 0.90 inside 30 minutes."""
    _, _, test_c = accept_corpus
    result, train_seconds = mtl_runs[0]
    report = evaluate_params(result.params, result.config, result.vocab, test_c)
    ok = report.micro_f1 >= 0.90 and report.fact_micro_f1 >= 0.90 and train_seconds < 1800.0
    _line(
        "learnability",
        ok,
        f"test micro F1 {report.micro_f1:.4f} (>= 0.90), fact micro F1 "
        f"{report.fact_micro_f1:.4f} (>= 0.90), trained in {train_seconds:.0f}s (< 1800s)",
    )


def test_multitask_direction(accept_corpus, mtl_runs, single_task_runs):
    """Joint training does not fall below single-task, median over 3 seeds."""
    _, _, test_c = accept_corpus
    mtl_scores = []
    single_scores = []
    for seed in (0, 1, 2):
        result, _ = mtl_runs[seed]
        mtl_scores.append(
            evaluate_params(result.params, result.config, result.vocab, test_c).micro_f1
        )
        single = single_task_runs[seed]
        single_scores.append(
            evaluate_params(single.params, single.config, single.vocab, test_c).micro_f1
        )
    mtl_median = float(np.median(mtl_scores))
    single_median = float(np.median(single_scores))
    ok = mtl_median >= single_median
    _line(
        "multitask-direction",
        ok,
        f"MTL median micro F1 {mtl_median:.4f} >= single-task {single_median:.4f} "
        f"(per-seed MTL {[round(v, 3) for v in mtl_scores]}, "
        f"single {[round(v, 3) for v in single_scores]})",
    )


def test_ablation_direction():
    """Removing the utterance memory hurts most, median over 3 seeds."""
    cases = synth_generate(seed=ABLATION_CORPUS_SEED, n_cases=700)
    cfg = _accept_config(epochs=10, test_fraction=0.2)
    rows = {r.name: r for r in run_ablations(cfg, cases, seeds=(0, 1, 2))}
    target = rows["no_utterance_memory"].micro_f1
    others = {n: rows[n].micro_f1 for n in ("no_role", "no_fact_memory", "no_self_attention")}
    ok = all(target < v for v in others.values())
    _line(
        "ablation-direction",
        ok,
        f"w/o utterance memory median micro F1 {target:.4f} < "
        + ", ".join(f"{n} {v:.4f}" for n, v in others.items())
        + f"; RIE(w/o utterance memory) {rows['no_utterance_memory'].rie_percent:.1f}%",
    )


def test_hop_machinery():
    """The hop sweep completes for T=1..6 with a constant parameter count."""
    cases = synth_generate(seed=88, n_cases=500)
    cfg = _accept_config(epochs=8)
    rows = hop_sweep(cfg, cases, hop_range=range(1, 7))
    counts = {r.parameter_count for r in rows}
    table = [
        {"hops": r.hops, "micro_f1": round(r.micro_f1, 4), "macro_f1": round(r.macro_f1, 4)}
        for r in rows
    ]
    t3 = next(r for r in rows if r.hops == 3)
    ok = (
        [r.hops for r in rows] == [1, 2, 3, 4, 5, 6]
        and len(counts) == 1
        and 0.0 <= t3.micro_f1 <= 1.0
    )
    _line(
        "hop-machinery",
        ok,
        f"6 rows, parameter count {counts} identical; report {table}",
    )


def test_majority_baseline_closed_form():
    """Constant-majority scoring matches the analytic values on a 1:2.6:10.9 mix."""
    from claimjudge.metrics import judgment_report

    gold = np.array([0] * 10 + [1] * 26 + [2] * 109)  # exact 1 : 2.6 : 10.9
    pred = np.full_like(gold, 2)
    report = judgment_report(gold, pred)
    ok = abs(report.micro_f1 - 0.7517) < 0.01 and abs(report.macro_f1 - 0.2863) < 0.01
    _line(
        "majority-baseline",
        ok,
        f"micro F1 {report.micro_f1:.4f} (0.7517 +- 0.01), macro F1 {report.macro_f1:.4f} (0.2863 +- 0.01)",
    )


def test_checkpoint_and_service_contract(accept_corpus, mtl_runs, mtl_checkpoint):
    """Round-trip metrics, service/library equivalence, decisive fact flip."""
    _, _, test_c = accept_corpus
    result, _ = mtl_runs[0]

    # save -> load -> evaluate is bit-identical
    direct = evaluate_params(result.params, result.config, result.vocab, test_c[:100])
    ckpt = load_checkpoint(mtl_checkpoint)
    loaded = evaluate_params(ckpt.params, ckpt.config, ckpt.vocab, test_c[:100])
    round_trip_ok = (
        direct.micro_f1 == loaded.micro_f1
        and direct.macro_f1 == loaded.macro_f1
        and np.array_equal(direct.confusion, loaded.confusion)
    )

    # /predict equals the direct library ForwardTrace
    client = TestClient(create_app(ckpt))
    case = test_c[0]
    payload = case.to_record()
    payload.pop("facts")
    payload.pop("judgments")
    resp = client.post("/predict", json=payload).json()
    batch = encode_batch([case], ckpt.vocab, ckpt.config.limits)
    with no_grad():
        lib = forward_batch(ckpt.params, ckpt.config, batch, train=False).cases[0]
    service_ok = (
        resp["attention"]["debate_to_claim"] == lib.trace.debate_to_claim.tolist()
        and resp["attention"]["debate_to_fact"] == lib.trace.debate_to_fact.tolist()
        and [c["distribution"] for c in resp["claims"]] == lib.judgment_probs.tolist()
    )

    # all-zero overrides equal the fact-memory-nulled library run
    zero = client.post(
        "/predict_with_overrides",
        json={**payload, "overrides": {label: 0.0 for label in FACT_LABELS}},
    ).json()
    nulled_cfg = TrainConfig.from_dict(ckpt.config.to_dict())
    nulled_cfg.ablation.no_fact_memory = True
    with no_grad():
        nulled = forward_batch(ckpt.params, nulled_cfg, batch, train=False).cases[0]
    zero_probs = np.array([c["distribution"] for c in zero["claims"]])
    override_dev = float(np.abs(zero_probs - nulled.judgment_probs).max())
    override_ok = override_dev < 1e-10

    # a decisive single-fact flip exists somewhere in the test corpus
    flip = find_decisive_flip(ModelBundle(ckpt), test_c)
    flip_ok = flip is not None

    ok = round_trip_ok and service_ok and override_ok and flip_ok
    _line(
        "checkpoint-service-contract",
        ok,
        f"round-trip bit-identical {round_trip_ok}; /predict == library {service_ok}; "
        f"zero-override deviation {override_dev:.2e} (< 1e-10); decisive flip "
        + (f"{flip['case_id']}:{flip['fact']}->{flip['override_value']} "
           f"claims {flip['before']} -> {flip['after']}" if flip else "NOT FOUND"),
    )
