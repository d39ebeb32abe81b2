"""Shared fixtures: a small trained model reused by checkpoint/service tests."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # reference_model importable

from claimjudge.config import TrainConfig
from claimjudge.synth import synth_generate
from claimjudge.training import split_cases, train


@pytest.fixture(scope="session")
def small_run():
    """A quickly trained model bundle: (result, held-out cases)."""
    cases = synth_generate(seed=101, n_cases=120)
    cfg = TrainConfig(epochs=4, seed=0, learning_rate=3e-3, patience=99)
    train_c, val_c, test_c = split_cases(cases, cfg.seed, 0.1, 0.1)
    result = train(cfg, train_c, val_cases=val_c)
    return result, test_c


@pytest.fixture(scope="session")
def small_checkpoint(small_run, tmp_path_factory):
    from claimjudge.checkpoint import save_checkpoint

    result, test_cases = small_run
    path = tmp_path_factory.mktemp("ckpt") / "small.npz"
    save_checkpoint(path, result.params, result.config, result.vocab)
    return path, test_cases
