"""Checkpoint container: parameters + config + vocabulary in one npz file.

Arrays are stored as raw float64, so save -> load round-trips bit-exactly.
A JSON metadata entry carries the format version, the full config, the
vocabulary (as the id-ordered token list) and the label names.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import TrainConfig
from .data import FACT_LABELS, JUDGMENT_LABELS, Vocabulary
from .params import ModelParams, params_from_arrays
from .tensor import ContractError

FORMAT_VERSION = 1
_META_KEY = "__meta__"


def checkpoint_hash(arrays: dict[str, np.ndarray]) -> str:
    """Digest of every parameter, order-independent via sorted names."""
    digest = hashlib.sha256()
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name], dtype=np.float64)
        digest.update(name.encode())
        digest.update(str(arr.shape).encode())
        digest.update(arr.tobytes())
    return digest.hexdigest()


@dataclass
class Checkpoint:
    params: ModelParams
    config: TrainConfig
    vocab: Vocabulary
    format_version: int
    hash: str


def save_checkpoint(path: str | Path, params: ModelParams, config: TrainConfig,
                    vocab: Vocabulary) -> str:
    """Write the bundle; returns the parameter hash."""
    arrays = {name: t.data for name, t in params.named()}
    meta = {
        "format_version": FORMAT_VERSION,
        "config": config.to_dict(),
        "vocab": vocab.id_to_token,
        "fact_labels": list(FACT_LABELS),
        "judgment_labels": list(JUDGMENT_LABELS),
    }
    payload = dict(arrays)
    payload[_META_KEY] = np.array(json.dumps(meta, sort_keys=True))
    with open(path, "wb") as fh:
        np.savez(fh, **payload)
    return checkpoint_hash(arrays)


def load_checkpoint(path: str | Path) -> Checkpoint:
    with np.load(path, allow_pickle=False) as npz:
        if _META_KEY not in npz:
            raise ContractError(f"{path}: not a checkpoint (missing metadata entry)")
        meta = json.loads(str(npz[_META_KEY]))
        arrays = {k: npz[k] for k in npz.files if k != _META_KEY}
    version = meta.get("format_version")
    if version != FORMAT_VERSION:
        raise ContractError(f"{path}: unsupported checkpoint format version {version!r}")
    config = TrainConfig.from_dict(meta["config"])
    vocab = Vocabulary(id_to_token=list(meta["vocab"]))
    embedding = arrays.get("encoder.word_embedding")
    if embedding is None or embedding.shape[0] != len(vocab):
        raise ContractError(
            f"{path}: vocabulary size {len(vocab)} does not match the embedding table "
            f"{None if embedding is None else embedding.shape}"
        )
    params = params_from_arrays(arrays, config, len(vocab))
    return Checkpoint(
        params=params,
        config=config,
        vocab=vocab,
        format_version=version,
        hash=checkpoint_hash(arrays),
    )
