"""Case records, vocabulary, and batch encoding with masks.

On disk a corpus is JSON-lines, one case per line:

    {"case_id": "...",
     "claims": [{"text": "..."}],
     "utterances": [{"role": "judge", "text": "..."}],
     "facts": [0/1 x 10],
     "judgments": ["support", ...]}      # one label per claim

Tokenization is whitespace splitting; cases keep token strings and the
vocabulary maps them to ids at batch time. ``facts``/``judgments`` may be
omitted for inference payloads but are mandatory in corpus files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import Limits

ROLES = ("judge", "plaintiff", "defendant", "witness")
ROLE_TO_ID = {r: i for i, r in enumerate(ROLES)}

JUDGMENT_LABELS = ("reject", "partially_support", "support")
JUDGMENT_TO_ID = {l: i for i, l in enumerate(JUDGMENT_LABELS)}

FACT_LABELS = (
    "agreed_loan_period",
    "couple_debt",
    "limitation_of_action",
    "liquidated_damages",
    "repayment_behavior",
    "term_of_guarantee",
    "guarantee_liability",
    "term_of_repayment",
    "interest_dispute",
    "loan_established",
)
NUM_FACTS = len(FACT_LABELS)
FACT_TO_ID = {l: i for i, l in enumerate(FACT_LABELS)}

PAD_ID = 0
UNK_ID = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"


class ValidationError(ValueError):
    """A case record violates the corpus schema."""


def tokenize(text: str) -> list[str]:
    return text.split()


@dataclass(frozen=True)
class Utterance:
    role: str
    tokens: tuple[str, ...]

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class Claim:
    tokens: tuple[str, ...]

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class Case:
    case_id: str
    claims: tuple[Claim, ...]
    utterances: tuple[Utterance, ...]
    gold_facts: tuple[int, ...] | None  # NUM_FACTS binary labels
    gold_judgments: tuple[str, ...] | None  # one label per claim

    def to_record(self) -> dict:
        record = {
            "case_id": self.case_id,
            "claims": [{"text": c.text} for c in self.claims],
            "utterances": [{"role": u.role, "text": u.text} for u in self.utterances],
        }
        if self.gold_facts is not None:
            record["facts"] = list(self.gold_facts)
        if self.gold_judgments is not None:
            record["judgments"] = list(self.gold_judgments)
        return record


def case_from_record(record: dict, require_labels: bool = True, where: str = "") -> Case:
    """Validate one JSON object into a Case; raise ValidationError with context."""

    def fail(message: str):
        case_id = record.get("case_id", "<missing>")
        raise ValidationError(f"{where}case {case_id!r}: {message}")

    if not isinstance(record, dict):
        raise ValidationError(f"{where}record is not an object")
    for key in ("case_id", "claims", "utterances"):
        if key not in record:
            fail(f"missing field {key!r}")
    claims = []
    for i, c in enumerate(record["claims"]):
        if not isinstance(c, dict) or "text" not in c:
            fail(f"claims[{i}] missing field 'text'")
        tokens = tuple(tokenize(c["text"]))
        if not tokens:
            fail(f"claims[{i}] is empty")
        claims.append(Claim(tokens=tokens))
    if not claims:
        fail("case has no claims")
    utterances = []
    for i, u in enumerate(record["utterances"]):
        if not isinstance(u, dict) or "role" not in u or "text" not in u:
            fail(f"utterances[{i}] missing field 'role' or 'text'")
        if u["role"] not in ROLE_TO_ID:
            fail(f"utterances[{i}] has unknown role {u['role']!r} (expected one of {ROLES})")
        tokens = tuple(tokenize(u["text"]))
        if not tokens:
            fail(f"utterances[{i}] is empty")
        utterances.append(Utterance(role=u["role"], tokens=tokens))
    if not utterances:
        fail("case has no utterances")

    facts = record.get("facts")
    judgments = record.get("judgments")
    if require_labels and (facts is None or judgments is None):
        fail("missing field 'facts' or 'judgments'")
    if facts is not None:
        if len(facts) != NUM_FACTS or any(f not in (0, 1) for f in facts):
            fail(f"'facts' must be {NUM_FACTS} binary labels, got {facts!r}")
        facts = tuple(int(f) for f in facts)
    if judgments is not None:
        if len(judgments) != len(claims):
            fail(f"{len(judgments)} judgments for {len(claims)} claims")
        for j in judgments:
            if j not in JUDGMENT_TO_ID:
                fail(f"unknown judgment label {j!r} (expected one of {JUDGMENT_LABELS})")
        judgments = tuple(judgments)
    return Case(
        case_id=str(record["case_id"]),
        claims=tuple(claims),
        utterances=tuple(utterances),
        gold_facts=facts,
        gold_judgments=judgments,
    )


def load_cases(path: str | Path) -> list[Case]:
    """Read a JSON-lines corpus; malformed records abort with line numbers."""
    cases = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"line {lineno}: invalid JSON: {exc}") from exc
            cases.append(case_from_record(record, require_labels=True, where=f"line {lineno}: "))
    return cases


def save_cases(path: str | Path, cases: list[Case]) -> None:
    with open(path, "w") as fh:
        for case in cases:
            fh.write(json.dumps(case.to_record(), sort_keys=True) + "\n")


@dataclass
class Vocabulary:
    """Token <-> id maps with reserved padding (0) and unknown (1) slots."""

    id_to_token: list[str]
    token_to_id: dict[str, int] = field(init=False)

    def __post_init__(self):
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}

    def __len__(self) -> int:
        return len(self.id_to_token)

    def encode(self, tokens) -> list[int]:
        return [self.token_to_id.get(t, UNK_ID) for t in tokens]

    def decode(self, ids) -> list[str]:
        return [self.id_to_token[i] for i in ids]


def build_vocab(cases: list[Case], min_count: int = 1) -> Vocabulary:
    """Count every token; keep those seen >= min_count, ids by (count desc, token asc)."""
    if min_count < 1:
        raise ValidationError(f"min_count must be >= 1, got {min_count}")
    counts: dict[str, int] = {}
    for case in cases:
        for utterance in case.utterances:
            for tok in utterance.tokens:
                counts[tok] = counts.get(tok, 0) + 1
        for claim in case.claims:
            for tok in claim.tokens:
                counts[tok] = counts.get(tok, 0) + 1
    survivors = sorted(
        (t for t, c in counts.items() if c >= min_count),
        key=lambda t: (-counts[t], t),
    )
    return Vocabulary(id_to_token=[PAD_TOKEN, UNK_TOKEN] + survivors)


@dataclass
class Batch:
    """Padded id arrays plus 0/1 masks; mask 0 positions never reach the model."""

    cases: list[Case]
    utt_tokens: np.ndarray  # [B, N, L] int64
    utt_roles: np.ndarray  # [B, N] int64
    utt_word_mask: np.ndarray  # [B, N, L] float64
    utt_lengths: np.ndarray  # [B] int64, utterances per case
    utt_word_lengths: np.ndarray  # [B, N] int64, words per utterance
    claim_tokens: np.ndarray  # [B, K, Q] int64
    claim_word_mask: np.ndarray  # [B, K, Q] float64
    claim_counts: np.ndarray  # [B] int64
    claim_word_lengths: np.ndarray  # [B, K] int64
    facts: np.ndarray | None  # [B, NUM_FACTS] float64
    judgments: np.ndarray | None  # [B, K] int64, -1 where padded

    @property
    def size(self) -> int:
        return len(self.cases)


def encode_batch(cases: list[Case], vocab: Vocabulary, limits: Limits) -> Batch:
    """Truncate (keeping the earliest tokens/utterances/claims) and pad."""
    if not cases:
        raise ValidationError("cannot encode an empty batch")
    for case in cases:
        if not case.claims:
            raise ValidationError(f"case {case.case_id!r} has no claims")
        if not case.utterances:
            raise ValidationError(f"case {case.case_id!r} has no utterances")

    # arrays are padded to the configured limits (not the batch maximum), so
    # a given Limits always yields the same shapes; the length-aware kernels
    # and exact-zero attention masking make the extra padding free
    B = len(cases)
    N = limits.max_utterances
    L = limits.max_utterance_len
    K = limits.max_claims
    Q = limits.max_claim_len

    utt_tokens = np.zeros((B, N, L), dtype=np.int64)
    utt_roles = np.zeros((B, N), dtype=np.int64)
    utt_word_mask = np.zeros((B, N, L))
    utt_lengths = np.zeros(B, dtype=np.int64)
    utt_word_lengths = np.zeros((B, N), dtype=np.int64)
    claim_tokens = np.zeros((B, K, Q), dtype=np.int64)
    claim_word_mask = np.zeros((B, K, Q))
    claim_counts = np.zeros(B, dtype=np.int64)
    claim_word_lengths = np.zeros((B, K), dtype=np.int64)
    have_labels = all(c.gold_facts is not None and c.gold_judgments is not None for c in cases)
    facts = np.zeros((B, NUM_FACTS)) if have_labels else None
    judgments = np.full((B, K), -1, dtype=np.int64) if have_labels else None

    for bi, case in enumerate(cases):
        utts = case.utterances[:N]
        utt_lengths[bi] = len(utts)
        for ui, utt in enumerate(utts):
            ids = vocab.encode(utt.tokens[:L])
            utt_tokens[bi, ui, : len(ids)] = ids
            utt_word_mask[bi, ui, : len(ids)] = 1.0
            utt_word_lengths[bi, ui] = len(ids)
            utt_roles[bi, ui] = ROLE_TO_ID[utt.role]
        cls = case.claims[:K]
        claim_counts[bi] = len(cls)
        for ci, claim in enumerate(cls):
            ids = vocab.encode(claim.tokens[:Q])
            claim_tokens[bi, ci, : len(ids)] = ids
            claim_word_mask[bi, ci, : len(ids)] = 1.0
            claim_word_lengths[bi, ci] = len(ids)
        if have_labels:
            facts[bi] = case.gold_facts
            for ci, label in enumerate(case.gold_judgments[:K]):
                judgments[bi, ci] = JUDGMENT_TO_ID[label]

    return Batch(
        cases=list(cases),
        utt_tokens=utt_tokens,
        utt_roles=utt_roles,
        utt_word_mask=utt_word_mask,
        utt_lengths=utt_lengths,
        utt_word_lengths=utt_word_lengths,
        claim_tokens=claim_tokens,
        claim_word_mask=claim_word_mask,
        claim_counts=claim_counts,
        claim_word_lengths=claim_word_lengths,
        facts=facts,
        judgments=judgments,
    )
