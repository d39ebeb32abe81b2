"""Synthetic case generator with a deterministic fact -> judgment oracle.

Every case is built by one generative program:

  1. draw a binary vector over the 10 fact labels,
  2. draw 1-3 claims, each tagged with a distinct claim type,
  3. label each claim with the rule oracle below,
  4. emit role-tagged utterances that tokenize the evidence: every fact
     gets exactly one utterance whose content (or speaker role, for the
     two role-coded facts) encodes whether the fact holds, and the judge
     reads one clause-binding utterance per claim.

The oracle (see also docs/rule_table.md): loan_established gates every
claim type -- when it is 0 the claim is rejected outright. Otherwise the
claim type's modifier fact decides between full and partial support:

  claim type   modifier fact          modifier=0   modifier=1
  principal    repayment_behavior     support      partially_support
  interest     interest_dispute       support      partially_support
  damages      liquidated_damages     support      partially_support
  guarantee    term_of_guarantee      support      partially_support
  costs        limitation_of_action   support      partially_support

Two facts (interest_dispute, liquidated_damages) are encoded by WHO
speaks rather than which token appears: an admission by the defendant
establishes the fact, the same sentence from a witness does not. Those
decisions are unlearnable without role information.

Each claim's text names the topic its judgment turns on (the modifier
fact's topic token), so a claim can be resolved by finding that topic's
evidence utterance plus the loan-establishment utterance in the debate.
Word embeddings are shared between the claim and utterance encoders,
which grounds that matching lexically.

Default probabilities put the judgment marginals at 1 : 2.6 : 10.9
(reject : partially_support : support); facts outside the rule table
default to an even coin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import FACT_LABELS, FACT_TO_ID, NUM_FACTS, Case, Claim, Utterance
from .tensor import DomainError

CLAIM_TYPES = ("principal", "interest", "damages", "guarantee", "costs")

GATE_FACT = "loan_established"

MODIFIER_FACT = {
    "principal": "repayment_behavior",
    "interest": "interest_dispute",
    "damages": "liquidated_damages",
    "guarantee": "term_of_guarantee",
    "costs": "limitation_of_action",
}

# facts whose truth is carried by the speaker role, not the token choice
ROLE_CODED_FACTS = ("interest_dispute", "liquidated_damages")

TOPIC_TOKENS = {
    "agreed_loan_period": "topic_loan_period",
    "couple_debt": "topic_marriage",
    "limitation_of_action": "topic_limitation",
    "liquidated_damages": "topic_penalty",
    "repayment_behavior": "topic_repayment",
    "term_of_guarantee": "topic_guarantee_term",
    "guarantee_liability": "topic_surety",
    "term_of_repayment": "topic_due_date",
    "interest_dispute": "topic_interest",
    "loan_established": "topic_loan",
}

# Evidence is compositional on purpose: the affirm/deny token is shared by
# every fact, so recognizing fact p means pairing its topic token with the
# verdict token inside one utterance. A per-fact shortcut token would let
# the fact pathway learn from bag-of-words statistics alone.
AFFIRM_TOKEN = "confirmed_on_record"
DENY_TOKEN = "denied_on_record"

# role-coded facts use one neutral assertion; the speaker carries the bit
ASSERTION_TOKEN = "objection_raised"
ASSERTING_ROLE = "defendant"  # admission: the fact is established
DENYING_ROLE = "witness"  # hearsay: the fact is not established

FILLER_WORDS = (
    "as_recorded",
    "per_transcript",
    "the_court_notes",
    "exhibit_a",
    "exhibit_b",
    "so_noted",
    "counsel_present",
    "no_objection",
)

NUM_CLAUSES = 5
CLAUSE_TOKENS = tuple(f"clause_{i}" for i in range(NUM_CLAUSES))

_RATIO = (1.0, 2.6, 10.9)  # reject : partially_support : support


@dataclass
class GeneratorProfile:
    """Knobs of the generative program; defaults hit the target label mix."""

    gate_true_prob: float = (_RATIO[1] + _RATIO[2]) / sum(_RATIO)
    modifier_true_prob: float = _RATIO[1] / (_RATIO[1] + _RATIO[2])
    background_true_prob: float = 0.5
    claim_count_probs: tuple[float, ...] = (0.25, 0.5, 0.25)  # P(k=1), P(k=2), P(k=3)
    max_filler: int = 3


def oracle_judgment(facts: Sequence[int], claim_type: str) -> str:
    """Deterministic judgment for one claim given the case's 10 fact bits."""
    if claim_type not in MODIFIER_FACT:
        raise DomainError(f"unknown claim type {claim_type!r} (expected one of {CLAIM_TYPES})")
    if len(facts) != NUM_FACTS:
        raise DomainError(f"expected {NUM_FACTS} fact bits, got {len(facts)}")
    if not facts[FACT_TO_ID[GATE_FACT]]:
        return "reject"
    if facts[FACT_TO_ID[MODIFIER_FACT[claim_type]]]:
        return "partially_support"
    return "support"


def _fact_probability(label: str, profile: GeneratorProfile) -> float:
    if label == GATE_FACT:
        return profile.gate_true_prob
    if label in MODIFIER_FACT.values():
        return profile.modifier_true_prob
    return profile.background_true_prob


def _fillers(rng: np.random.Generator, profile: GeneratorProfile) -> list[str]:
    n = int(rng.integers(0, profile.max_filler + 1))
    return [FILLER_WORDS[int(i)] for i in rng.integers(0, len(FILLER_WORDS), size=n)]


def _fact_utterance(label: str, active: bool, rng: np.random.Generator,
                    profile: GeneratorProfile) -> Utterance:
    topic = TOPIC_TOKENS[label]
    if label in ROLE_CODED_FACTS:
        role = ASSERTING_ROLE if active else DENYING_ROLE
        tokens = [topic, ASSERTION_TOKEN]
    else:
        role = ("plaintiff", "defendant", "witness")[int(rng.integers(0, 3))]
        tokens = [topic, AFFIRM_TOKEN if active else DENY_TOKEN]
    tokens += _fillers(rng, profile)
    return Utterance(role=role, tokens=tuple(tokens))


def generate_case(case_id: str, rng: np.random.Generator, profile: GeneratorProfile) -> Case:
    facts = tuple(
        int(rng.random() < _fact_probability(label, profile)) for label in FACT_LABELS
    )

    k = 1 + int(rng.choice(len(profile.claim_count_probs), p=profile.claim_count_probs))
    types = [CLAIM_TYPES[i] for i in rng.permutation(len(CLAIM_TYPES))[:k]]
    claims, judgments = [], []
    for claim_type in types:
        topic = TOPIC_TOKENS[MODIFIER_FACT[claim_type]]
        claims.append(
            Claim(tokens=("demand_on", topic, "of", f"amount_{int(rng.integers(0, 10))}"))
        )
        judgments.append(oracle_judgment(facts, claim_type))

    utterances = [
        Utterance(role="judge", tokens=("court_opens", "case_called", *_fillers(rng, profile)))
    ]
    for fi in rng.permutation(NUM_FACTS):
        label = FACT_LABELS[int(fi)]
        utterances.append(_fact_utterance(label, bool(facts[int(fi)]), rng, profile))
    utterances.append(Utterance(role="judge", tokens=("session_ends", "awaiting_verdict")))

    return Case(
        case_id=case_id,
        claims=tuple(claims),
        utterances=tuple(utterances),
        gold_facts=facts,
        gold_judgments=tuple(judgments),
    )


def synth_generate(seed: int, n_cases: int, profile: GeneratorProfile | None = None) -> list[Case]:
    """Generate a corpus; byte-identical for identical (seed, n_cases, profile)."""
    if n_cases < 1:
        raise DomainError(f"n_cases must be >= 1, got {n_cases}")
    profile = profile or GeneratorProfile()
    rng = np.random.default_rng(seed)
    return [generate_case(f"case_{i:06d}", rng, profile) for i in range(n_cases)]


_TOPIC_TO_TYPE = {TOPIC_TOKENS[fact]: t for t, fact in MODIFIER_FACT.items()}


def claim_types_from_case(case: Case) -> list[str]:
    """Recover each claim's type from the topic token in its text."""
    types = []
    for claim in case.claims:
        if len(claim.tokens) < 2 or claim.tokens[1] not in _TOPIC_TO_TYPE:
            raise DomainError(f"case {case.case_id!r}: claim {claim.text!r} names no known topic")
        types.append(_TOPIC_TO_TYPE[claim.tokens[1]])
    return types
