"""HTTP prediction service: inference, attention traces, fact overrides.

Endpoints (JSON bodies, schema_version in every response):

  POST /predict                 full forward pass for one case payload
  POST /predict_with_overrides  same, with chosen fact probabilities forced
  GET  /model/info              dimensions, labels, vocab size, checkpoint hash

Responses are pure functions of (checkpoint, payload): dropout is off,
no state survives a request. Raw text is tokenized with the checkpoint's
vocabulary, so clients never need vocabulary knowledge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .checkpoint import Checkpoint, load_checkpoint
from .data import (
    FACT_LABELS,
    JUDGMENT_LABELS,
    Case,
    ValidationError,
    case_from_record,
    encode_batch,
)
from .model import ForwardTrace, forward_batch
from .tensor import no_grad

SCHEMA_VERSION = 1


def certainty_bucket(probability: float) -> str:
    """certain above 0.7 (strict), uncertain in [0.45, 0.55], other elsewhere."""
    if probability > 0.7:
        return "certain"
    if 0.45 <= probability <= 0.55:
        return "uncertain"
    return "other"


@dataclass
class ModelBundle:
    checkpoint: Checkpoint

    def predict(self, case: Case, overrides: np.ndarray | None = None):
        ckpt = self.checkpoint
        batch = encode_batch([case], ckpt.vocab, ckpt.config.limits)
        with no_grad():
            result = forward_batch(ckpt.params, ckpt.config, batch, train=False,
                                   fact_overrides=overrides)
        return result.cases[0]


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message, "schema_version": SCHEMA_VERSION})


def _parse_case(payload: dict) -> Case:
    if "case_id" not in payload:
        payload = {**payload, "case_id": "request"}
    return case_from_record(payload, require_labels=False)


def _trace_payload(trace: ForwardTrace) -> dict:
    body = trace.to_jsonable()
    return {
        "word_level_utterances": body["utterance_word_attention"],
        "word_level_claims": body["claim_word_attention"],
        "debate_to_claim": body["debate_to_claim"],
        "debate_to_fact": body["debate_to_fact"],
        "fact_to_claim": body["fact_to_claim"],
        "across_claim_per_hop": body["across_claim_per_hop"],
    }


def _prediction_response(case_out, overridden: set[str]) -> dict:
    claims = []
    for idx, row in enumerate(case_out.judgment_probs):
        claims.append(
            {
                "index": idx,
                "distribution": [float(v) for v in row],
                "label": case_out.predicted_labels[idx],
            }
        )
    facts = []
    used = case_out.trace.fact_probs_used
    if used is not None:
        for zi, label in enumerate(FACT_LABELS):
            probability = float(used[zi])
            facts.append(
                {
                    "label": label,
                    "probability": probability,
                    "model_probability": float(case_out.trace.fact_probs[zi]),
                    "bucket": certainty_bucket(probability),
                    "overridden": label in overridden,
                }
            )
    return {
        "schema_version": SCHEMA_VERSION,
        "case_id": case_out.case_id,
        "claims": claims,
        "facts": facts,
        "judgment_labels": list(JUDGMENT_LABELS),
        "attention": _trace_payload(case_out.trace),
    }


def create_app(checkpoint: Checkpoint | str | Path | None, ui_dir: str | Path | None = None) -> FastAPI:
    """Build the service; ``checkpoint`` may be a path, an object, or None
    (every prediction endpoint then answers 503)."""
    app = FastAPI(title="claimjudge prediction service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST", "OPTIONS"],
        allow_headers=["Content-Type"],
    )
    if checkpoint is not None and not isinstance(checkpoint, Checkpoint):
        checkpoint = load_checkpoint(checkpoint)
    app.state.bundle = ModelBundle(checkpoint) if checkpoint is not None else None

    async def _read_case(request: Request):
        try:
            payload = await request.json()
        except json.JSONDecodeError:
            return None, _error(400, "request body is not valid JSON")
        if not isinstance(payload, dict):
            return None, _error(400, "request body must be a JSON object")
        return payload, None

    def _validated_case(payload: dict):
        try:
            case = _parse_case(payload)
        except ValidationError as exc:
            message = str(exc)
            if "no claims" in message or "no utterances" in message or "is empty" in message:
                return None, _error(422, message)
            return None, _error(400, message)
        return case, None

    @app.post("/predict")
    async def predict(request: Request):
        if app.state.bundle is None:
            return _error(503, "no model loaded")
        payload, err = await _read_case(request)
        if err is not None:
            return err
        case, err = _validated_case(payload)
        if err is not None:
            return err
        case_out = app.state.bundle.predict(case)
        return JSONResponse(content=_prediction_response(case_out, overridden=set()))

    @app.post("/predict_with_overrides")
    async def predict_with_overrides(request: Request):
        if app.state.bundle is None:
            return _error(503, "no model loaded")
        payload, err = await _read_case(request)
        if err is not None:
            return err
        raw_overrides = payload.pop("overrides", {})
        if not isinstance(raw_overrides, dict):
            return _error(400, "field 'overrides' must be an object of fact label -> probability")
        vector = np.full(len(FACT_LABELS), np.nan)
        for label, value in raw_overrides.items():
            if label not in FACT_LABELS:
                return _error(400, f"unknown fact label {label!r}")
            if not isinstance(value, (int, float)) or not 0.0 <= float(value) <= 1.0:
                return _error(400, f"override for {label!r} must be a probability in [0, 1]")
            vector[FACT_LABELS.index(label)] = float(value)
        case, err = _validated_case(payload)
        if err is not None:
            return err
        overrides = vector if raw_overrides else None
        case_out = app.state.bundle.predict(case, overrides=overrides)
        return JSONResponse(content=_prediction_response(case_out, overridden=set(raw_overrides)))

    @app.get("/model/info")
    async def model_info():
        if app.state.bundle is None:
            return _error(503, "no model loaded")
        ckpt = app.state.bundle.checkpoint
        cfg = ckpt.config
        return JSONResponse(
            content={
                "schema_version": SCHEMA_VERSION,
                "embed_dim": cfg.embed_dim,
                "role_dim": cfg.role_dim,
                "hidden_dim": cfg.hidden_dim,
                "hops": cfg.hops,
                "vocab_size": len(ckpt.vocab),
                "checkpoint_hash": ckpt.hash,
                "fact_labels": list(FACT_LABELS),
                "judgment_labels": list(JUDGMENT_LABELS),
                "format_version": ckpt.format_version,
            }
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def find_decisive_flip(bundle: ModelBundle, cases: list[Case], limit: int | None = None):
    """Search for a case where forcing one fact probability flips a claim.

    Prefers the off-to-on direction (model scores the fact below 0.5,
    override forces it to 1.0); falls back to on-to-off. Returns the
    first hit as a dict, else None.
    """
    for off_to_on in (True, False):
        for case in cases[:limit]:
            base = bundle.predict(case)
            base_labels = list(np.argmax(base.judgment_probs, axis=1))
            for zi, label in enumerate(FACT_LABELS):
                model_p = float(base.fact_probs[zi])
                if (model_p < 0.5) != off_to_on:
                    continue
                forced = 1.0 if off_to_on else 0.0
                vector = np.full(len(FACT_LABELS), np.nan)
                vector[zi] = forced
                flipped = bundle.predict(case, overrides=vector)
                new_labels = list(np.argmax(flipped.judgment_probs, axis=1))
                if new_labels != base_labels:
                    changed = [i for i, (a, b) in enumerate(zip(base_labels, new_labels)) if a != b]
                    return {
                        "case_id": case.case_id,
                        "fact": label,
                        "override_value": forced,
                        "changed_claims": changed,
                        "before": [JUDGMENT_LABELS[i] for i in base_labels],
                        "after": [JUDGMENT_LABELS[i] for i in new_labels],
                    }
    return None
