"""Joint per-claim judgment prediction and fact recognition over court debates.

The model encodes role-tagged debate utterances and pre-trial claims with
hierarchical BiLSTM + attention encoders, refines claim representations
through gated utterance/fact memory reads with multi-hop self-attention,
and decodes per-claim judgments alongside per-fact probabilities trained
jointly. Ships with a synthetic rule-oracle corpus generator, a training
and evaluation CLI, and an HTTP prediction service that exposes every
attention map and accepts human fact corrections.
"""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import AblationFlags, Limits, TrainConfig
from .data import (
    FACT_LABELS,
    JUDGMENT_LABELS,
    ROLES,
    Case,
    Claim,
    Utterance,
    Vocabulary,
    build_vocab,
    encode_batch,
    load_cases,
    save_cases,
)
from .model import BatchOutput, CaseOutput, ForwardTrace, forward_batch
from .params import ModelParams, init_model_params
from .synth import GeneratorProfile, oracle_judgment, synth_generate
from .tensor import ContractError, DomainError, ShapeError, Tape, Tensor, no_grad
from .training import evaluate, hop_sweep, run_ablations, split_cases, train

__version__ = "0.1.0"

__all__ = [
    "AblationFlags",
    "BatchOutput",
    "Case",
    "CaseOutput",
    "Checkpoint",
    "Claim",
    "ContractError",
    "DomainError",
    "FACT_LABELS",
    "ForwardTrace",
    "GeneratorProfile",
    "JUDGMENT_LABELS",
    "Limits",
    "ModelParams",
    "ROLES",
    "ShapeError",
    "Tape",
    "Tensor",
    "TrainConfig",
    "Utterance",
    "Vocabulary",
    "build_vocab",
    "encode_batch",
    "evaluate",
    "forward_batch",
    "hop_sweep",
    "init_model_params",
    "load_cases",
    "load_checkpoint",
    "no_grad",
    "oracle_judgment",
    "run_ablations",
    "save_cases",
    "save_checkpoint",
    "split_cases",
    "synth_generate",
    "train",
]
