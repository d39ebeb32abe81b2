"""Decoders and losses: judgment softmax, fact sigmoid, cross-entropies."""

import numpy as np
import pytest

from claimjudge import heads
from claimjudge.params import HeadParams
from claimjudge.tensor import ContractError, Tape, Tensor, no_grad


def _heads(seed=0, width=4, z=3):
    rng = np.random.default_rng(seed)
    t = lambda *s: Tensor(rng.normal(size=s) * 0.5, requires_grad=True)
    return HeadParams(judgment_w=t(3, width), judgment_b=t(3), fact_w=t(z, width), fact_b=t(z))


class TestPredictJudgment:
    def test_zero_params_give_uniform(self):
        p = HeadParams(judgment_w=Tensor(np.zeros((3, 4))), judgment_b=Tensor(np.zeros(3)),
                       fact_w=None, fact_b=None)
        with no_grad():
            probs = heads.predict_judgment(Tensor(np.random.default_rng(0).normal(size=(2, 4))), p)
        assert np.allclose(probs.data, 1 / 3, atol=1e-12)

    def test_logit_shift_invariance(self):
        p = _heads(1)
        claims = np.random.default_rng(2).normal(size=(2, 4))
        shifted = HeadParams(
            judgment_w=p.judgment_w,
            judgment_b=Tensor(p.judgment_b.data + 7.5),
            fact_w=None, fact_b=None,
        )
        with no_grad():
            base = heads.predict_judgment(Tensor(claims), p)
            moved = heads.predict_judgment(Tensor(claims), shifted)
        assert np.allclose(base.data, moved.data, atol=1e-12)

    def test_matches_reference(self):
        from reference_model import softmax_vec

        p = _heads(3)
        claims = np.random.default_rng(4).normal(size=(3, 4)) * 2.0
        with no_grad():
            probs = heads.predict_judgment(Tensor(claims), p)
        for j in range(3):
            expected = softmax_vec(p.judgment_w.data @ claims[j] + p.judgment_b.data)
            assert np.allclose(probs.data[j], expected, atol=1e-10)
        assert np.allclose(probs.data.sum(axis=1), 1.0, atol=1e-12)


class TestClaimLoss:
    def test_perfect_prediction_is_tiny(self):
        probs = Tensor(np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]))
        onehot = np.array([[1, 0, 0], [0, 0, 1]], dtype=float)
        with no_grad():
            assert heads.claim_loss(probs, onehot).item() <= 1e-11

    def test_uniform_prediction_is_ln3(self):
        for k in (1, 2, 5):
            probs = Tensor(np.full((k, 3), 1 / 3))
            onehot = np.zeros((k, 3))
            onehot[:, 1] = 1.0
            with no_grad():
                loss = heads.claim_loss(probs, onehot).item()
            assert abs(loss - np.log(3.0)) < 1e-12

    def test_hand_value_k2(self):
        probs = Tensor(np.array([[0.7, 0.2, 0.1], [0.1, 0.6, 0.3]]))
        onehot = np.array([[1, 0, 0], [0, 0, 1]], dtype=float)
        expected = -(np.log(0.7) + np.log(0.3)) / 2.0
        with no_grad():
            assert abs(heads.claim_loss(probs, onehot).item() - expected) < 1e-10

    def test_non_one_hot_rejected(self):
        probs = Tensor(np.full((1, 3), 1 / 3))
        with pytest.raises(ContractError, match="one-hot"):
            heads.claim_loss(probs, np.array([[0.5, 0.5, 0.0]]))


class TestPredictFacts:
    def test_zero_params_give_half(self):
        p = HeadParams(judgment_w=Tensor(np.zeros((3, 4))), judgment_b=Tensor(np.zeros(3)),
                       fact_w=Tensor(np.zeros((3, 4))), fact_b=Tensor(np.zeros(3)))
        with no_grad():
            probs = heads.predict_facts(Tensor(np.random.default_rng(5).normal(size=(3, 4))), p)
        assert np.allclose(probs.data, 0.5, atol=1e-12)

    def test_open_interval_range(self):
        p = _heads(6)
        vecs = np.random.default_rng(7).normal(size=(3, 4)) * 100
        with no_grad():
            probs = heads.predict_facts(Tensor(vecs), p)
        assert np.all(probs.data > 0.0) and np.all(probs.data < 1.0)

    def test_matches_reference(self):
        from reference_model import sigmoid

        p = _heads(8)
        vecs = np.random.default_rng(9).normal(size=(3, 4))
        with no_grad():
            probs = heads.predict_facts(Tensor(vecs), p)
        expected = sigmoid((p.fact_w.data * vecs).sum(axis=1) + p.fact_b.data)
        assert np.allclose(probs.data, expected, atol=1e-10)

    def test_disabled_head_rejected(self):
        p = HeadParams(judgment_w=Tensor(np.zeros((3, 4))), judgment_b=Tensor(np.zeros(3)),
                       fact_w=None, fact_b=None)
        with pytest.raises(ContractError, match="disabled"):
            heads.predict_facts(Tensor(np.zeros((3, 4))), p)


class TestFactLoss:
    def test_half_probabilities_give_ln2(self):
        for targets in ([0, 0], [1, 1], [1, 0]):
            probs = Tensor(np.array([0.5, 0.5]))
            with no_grad():
                loss = heads.fact_loss(probs, np.array(targets, dtype=float)).item()
            assert abs(loss - np.log(2.0)) < 1e-12

    def test_perfect_prediction_is_tiny(self):
        probs = Tensor(np.array([1.0, 0.0, 1.0]))
        with no_grad():
            loss = heads.fact_loss(probs, np.array([1.0, 0.0, 1.0])).item()
        assert loss <= 1e-11

    def test_hand_value_z2(self):
        probs = Tensor(np.array([0.8, 0.3]))
        targets = np.array([1.0, 0.0])
        expected = -(np.log(0.8) + np.log(0.7)) / 2.0
        with no_grad():
            assert abs(heads.fact_loss(probs, targets).item() - expected) < 1e-10


class TestTotalLoss:
    def test_missing_fact_loss_passthrough(self):
        lc = Tensor(np.array(1.25))
        assert heads.total_loss(lc, None).item() == 1.25

    def test_commutative(self):
        a, b = Tensor(np.array(0.5)), Tensor(np.array(1.5))
        assert heads.total_loss(a, b).item() == heads.total_loss(b, a).item() == 2.0

    def test_gradient_is_sum_of_per_loss_gradients(self):
        """One backward through L_c + L_f equals two separate backwards summed."""
        from claimjudge.tensor import matmul, relu, transpose

        rng = np.random.default_rng(10)
        shared = Tensor(rng.normal(size=(4, 4)) * 0.5, requires_grad=True)  # shared encoder stand-in
        inputs_c = Tensor(rng.normal(size=(2, 4)))
        inputs_f = Tensor(rng.normal(size=(3, 4)))
        p = _heads(11)
        onehot = np.array([[1, 0, 0], [0, 0, 1]], dtype=float)
        targets = np.array([1.0, 0.0, 1.0])
        wrt = [shared, p.judgment_w, p.judgment_b, p.fact_w, p.fact_b]

        def forward_losses():
            claims = relu(matmul(inputs_c, transpose(shared)))
            facts = relu(matmul(inputs_f, transpose(shared)))
            lc = heads.claim_loss(heads.predict_judgment(claims, p), onehot)
            lf = heads.fact_loss(heads.predict_facts(facts, p), targets)
            return lc, lf

        def run_backward(select):
            for t in wrt:
                t.grad = None
            with Tape() as tape:
                lc, lf = forward_losses()
                loss = select(lc, lf)
            tape.backward(loss)
            return [t.grad.copy() if t.grad is not None else np.zeros_like(t.data) for t in wrt]

        total = run_backward(lambda lc, lf: heads.total_loss(lc, lf))
        only_c = run_backward(lambda lc, lf: lc)
        only_f = run_backward(lambda lc, lf: lf)
        for g_total, g_c, g_f in zip(total, only_c, only_f):
            assert np.allclose(g_total, g_c + g_f, atol=1e-10)
