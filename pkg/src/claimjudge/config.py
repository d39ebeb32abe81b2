"""Run configuration: dimensions, limits, ablation switches, training knobs.

Everything serializes to/from plain JSON so a single ``--config`` file can
drive the CLI and ride along inside checkpoints.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


@dataclass
class Limits:
    """Truncation/padding caps applied when encoding cases."""

    max_utterances: int = 20
    max_utterance_len: int = 16
    max_claims: int = 4
    max_claim_len: int = 8


@dataclass
class AblationFlags:
    """Component switches; all off reproduces the full model."""

    no_role: bool = False
    no_utterance_memory: bool = False
    no_fact_memory: bool = False
    no_self_attention: bool = False
    single_task: bool = False

    def fact_pathway_enabled(self) -> bool:
        return not (self.no_fact_memory or self.single_task)

    def fact_task_enabled(self) -> bool:
        return not self.single_task


@dataclass
class TrainConfig:
    # model dimensions
    embed_dim: int = 32
    role_dim: int = 32
    hidden_dim: int = 32
    hops: int = 2
    num_facts: int = 10

    # optimization
    learning_rate: float = 1e-3
    batch_size: int = 16
    drop_rate: float = 0.2
    epochs: int = 30
    seed: int = 0
    patience: int = 10
    clip_norm: float = 5.0
    fact_loss_weight: float = 1.0

    # dropout sites
    dropout_embeddings: bool = True
    dropout_classifier_inputs: bool = True

    # data
    corpus_path: str | None = None
    vocab_min_count: int = 1
    val_fraction: float = 0.1
    test_fraction: float = 0.1
    kfold: int = 0

    limits: Limits = field(default_factory=Limits)
    ablation: AblationFlags = field(default_factory=AblationFlags)

    def __post_init__(self):
        # single-task removes the auxiliary loss and the fact memory together
        if self.ablation.single_task:
            self.ablation.no_fact_memory = True

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "TrainConfig":
        payload = dict(payload)
        limits = payload.pop("limits", {})
        ablation = payload.pop("ablation", {})
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**payload)
        cfg.limits = Limits(**limits) if isinstance(limits, dict) else limits
        cfg.ablation = AblationFlags(**ablation) if isinstance(ablation, dict) else ablation
        cfg.__post_init__()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "TrainConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
