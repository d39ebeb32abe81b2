"""Reusable verification harnesses: per-primitive and whole-model gradchecks.

Shared by the test suite and the ``gradcheck`` CLI verb so both run the
exact same checks.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .config import TrainConfig
from .data import ROLES, Case, Claim, Utterance, Vocabulary, encode_batch
from .gradcheck import gradcheck
from .model import forward_batch
from .params import init_model_params
from .rnn import lstm_cell, lstm_sequence
from .tensor import Tensor


def _t(rng, *shape, scale=1.0):
    return Tensor(rng.normal(scale=scale, size=shape), requires_grad=True)


def primitive_gradchecks(seeds: int = 100) -> dict[str, float]:
    """Check every differentiable primitive on random small shapes.

    Returns the worst relative error per primitive over all seeds.
    """
    worst: dict[str, float] = {}

    def check(name, build, wrt):
        err = gradcheck(build, wrt)
        worst[name] = max(worst.get(name, 0.0), err)

    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        m, k, n = (int(v) for v in rng.integers(1, 8, size=3))
        a = _t(rng, m, k)
        b = _t(rng, m, k)
        g = rng.normal(size=(m, k))
        check("add", lambda: T.tsum(T.add(a, b) * Tensor(g)), [a, b])
        check("sub", lambda: T.tsum(T.sub(a, b) * Tensor(g)), [a, b])
        check("mul", lambda: T.tsum(T.mul(a, b) * Tensor(g)), [a, b])
        row = _t(rng, k)
        check("add_broadcast", lambda: T.tsum(T.add(a, row) * Tensor(g)), [a, row])
        check("mul_broadcast", lambda: T.tsum(T.mul(a, row) * Tensor(g)), [a, row])

        x2 = _t(rng, m, k)
        y2 = _t(rng, k, n)
        gmn = rng.normal(size=(m, n))
        gm, gk = rng.normal(size=m), rng.normal(size=k)
        check("matmul_2d", lambda: T.tsum(T.matmul(x2, y2) * Tensor(gmn)), [x2, y2])
        v = _t(rng, k)
        check("matmul_mat_vec", lambda: T.tsum(T.matmul(x2, v) * Tensor(gm)), [x2, v])
        u = _t(rng, m)
        check("matmul_vec_mat", lambda: T.tsum(T.matmul(u, x2) * Tensor(gk)), [u, x2])

        check("transpose", lambda: T.tsum(T.transpose(x2) * Tensor(g.T)), [x2])
        check("reshape", lambda: T.tsum(T.reshape(a, (k, m)) * Tensor(g.reshape(k, m))), [a])
        check("broadcast_to", lambda: T.tsum(T.broadcast_to(T.reshape(row, (1, k)), (m, k)) * Tensor(g)), [row])
        check("concat", lambda: T.tsum(T.concat([a, b], axis=0) * Tensor(np.vstack([g, g]))), [a, b])
        lo = int(rng.integers(0, k))
        hi = int(rng.integers(lo + 1, k + 1))
        check("slice_axis", lambda: T.tsum(T.slice_axis(a, 1, lo, hi) * Tensor(g[:, lo:hi])), [a])
        ids = rng.integers(0, m, size=(2, 3))
        g_rows = rng.normal(size=(2, 3, k))
        check("take_rows", lambda: T.tsum(T.take_rows(a, ids) * Tensor(g_rows)), [a])

        check("sum_all", lambda: T.tsum(a), [a])
        check("sum_axis", lambda: T.tsum(T.tsum(a, axis=0) * Tensor(g[0])), [a])
        check("sigmoid", lambda: T.tsum(T.sigmoid(a) * Tensor(g)), [a])
        check("tanh", lambda: T.tsum(T.tanh(a) * Tensor(g)), [a])
        check("relu", lambda: T.tsum(T.relu(T.add(a, 0.1)) * Tensor(g)), [a])
        pos = _t(rng, m, k)
        pos.data = np.abs(pos.data) + 0.5
        check("log", lambda: T.tsum(T.tlog(pos) * Tensor(g)), [pos])
        check("clamp", lambda: T.tsum(T.clamp(a, -0.5, 0.5) * Tensor(g)), [a])
        check("softmax", lambda: T.tsum(T.softmax(a, axis=1) * Tensor(g)), [a])
        mask = (rng.random((m, k)) < 0.7).astype(float)
        mask[:, 0] = 1.0
        check("masked_softmax", lambda: T.tsum(T.masked_softmax(a, mask, axis=1) * Tensor(g)), [a])

        def dropout_loss():
            drop_rng = np.random.default_rng(seed)  # frozen mask per evaluation
            return T.tsum(T.dropout(a, 0.3, True, drop_rng) * Tensor(g))

        check("dropout", dropout_loss, [a])

        din, hid = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        x = _t(rng, 2, din, scale=0.8)
        h0 = _t(rng, 2, hid, scale=0.8)
        c0 = _t(rng, 2, hid, scale=0.8)
        w_x = _t(rng, din, 4 * hid, scale=0.5)
        w_h = _t(rng, hid, 4 * hid, scale=0.5)
        bias = _t(rng, 4 * hid, scale=0.3)
        gh = rng.normal(size=(2, hid))

        def cell_loss():
            h, c = lstm_cell(x, h0, c0, w_x, w_h, bias)
            return T.tsum(T.add(T.mul(h, Tensor(gh)), T.mul(c, Tensor(gh))))

        check("lstm_cell", cell_loss, [x, h0, c0, w_x, w_h, bias])

        steps = int(rng.integers(1, 5))
        xs = _t(rng, 2, steps, din, scale=0.8)
        lengths = np.array([steps, max(1, steps - 1)], dtype=np.int64)
        gs = rng.normal(size=(2, steps, hid))
        for reverse in (False, True):
            check(
                f"lstm_sequence_{'rev' if reverse else 'fwd'}",
                lambda reverse=reverse: T.tsum(
                    lstm_sequence(xs, lengths, w_x, w_h, bias, reverse=reverse) * Tensor(gs)
                ),
                [xs, w_x, w_h, bias],
            )

    # 1-d dot product produces a scalar, checked with its own loop
    for seed in range(seeds):
        rng = np.random.default_rng(10_000 + seed)
        k = int(rng.integers(1, 8))
        v1, v2 = _t(rng, k), _t(rng, k)
        err = gradcheck(lambda: T.matmul(v1, v2), [v1, v2])
        worst["matmul_dot"] = max(worst.get("matmul_dot", 0.0), err)
    return worst


def tiny_config(num_facts: int = 3, hops: int = 2) -> TrainConfig:
    return TrainConfig(
        embed_dim=3,
        role_dim=2,
        hidden_dim=2,
        hops=hops,
        num_facts=num_facts,
        drop_rate=0.0,
    )


def tiny_case(rng: np.random.Generator, vocab: Vocabulary, n_utterances: int = 3,
              n_claims: int = 2) -> Case:
    words = vocab.id_to_token[2:]

    def sample_tokens(max_len):
        length = int(rng.integers(1, max_len + 1))
        return tuple(words[i] for i in rng.integers(0, len(words), size=length))

    utterances = tuple(
        Utterance(role=ROLES[int(rng.integers(0, 4))], tokens=sample_tokens(4))
        for _ in range(n_utterances)
    )
    claims = tuple(Claim(tokens=sample_tokens(3)) for _ in range(n_claims))
    judgments = tuple(("reject", "partially_support", "support")[int(rng.integers(0, 3))]
                      for _ in range(n_claims))
    facts = tuple(int(v) for v in rng.integers(0, 2, size=10))
    return Case(case_id="tiny", claims=claims, utterances=utterances,
                gold_facts=facts, gold_judgments=judgments)


def tiny_vocab(size: int = 12) -> Vocabulary:
    return Vocabulary(id_to_token=["<pad>", "<unk>"] + [f"w{i}" for i in range(size - 2)])


def composed_model_gradcheck(seeds: int = 100, sample_per_tensor: int = 2) -> float:
    """Finite-difference check of the full model (k=2, n=3, z=3, h=2, T=2).

    Probes ``sample_per_tensor`` random elements of every parameter per
    seed; the analytic gradient is always the complete backward pass.
    """
    worst = 0.0
    cfg = tiny_config()
    vocab = tiny_vocab()
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        params = init_model_params(cfg, len(vocab), rng)
        batch = encode_batch([tiny_case(rng, vocab)], vocab, cfg.limits)
        wrt = [t for _, t in params.named()]

        def build_loss():
            return forward_batch(params, cfg, batch, train=False).loss

        # eps an order larger than the primitive checks: the composed loss
        # stacks ~10 nonlinear layers, so 1e-6 steps sit at roundoff level
        err = gradcheck(build_loss, wrt, eps=1e-5, sample_per_tensor=sample_per_tensor,
                        rng=np.random.default_rng(seed + 1))
        worst = max(worst, err)
    return worst
