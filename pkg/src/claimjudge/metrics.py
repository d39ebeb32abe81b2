"""Evaluation metrics: pooled claim-level P/R/F1 and per-fact binary F1.

Micro F1 over single-label multi-class predictions equals plain accuracy;
macro F1 is the unweighted mean of per-class F1 where a class absent from
both gold and predictions contributes 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import FACT_LABELS, JUDGMENT_LABELS


def confusion_matrix(gold, pred, n_classes: int) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    for g, p in zip(gold, pred):
        cm[g, p] += 1
    return cm


def precision_recall_f1(cm: np.ndarray):
    """Per-class precision/recall/F1 from a confusion matrix (rows = gold)."""
    n = cm.shape[0]
    precision = np.zeros(n)
    recall = np.zeros(n)
    f1 = np.zeros(n)
    for c in range(n):
        tp = cm[c, c]
        predicted = cm[:, c].sum()
        actual = cm[c, :].sum()
        precision[c] = tp / predicted if predicted else 0.0
        recall[c] = tp / actual if actual else 0.0
        denom = precision[c] + recall[c]
        f1[c] = 2 * precision[c] * recall[c] / denom if denom else 0.0
    return precision, recall, f1


@dataclass
class FactLabelReport:
    label: str
    micro_f1: float  # equals accuracy of the binary decision
    macro_f1: float  # mean of the positive- and negative-class F1


@dataclass
class EvalReport:
    macro_precision: float
    macro_recall: float
    macro_f1: float
    micro_f1: float
    confusion: np.ndarray  # [3, 3], rows = gold
    per_fact: list[FactLabelReport] = field(default_factory=list)
    fact_micro_f1: float | None = None  # pooled over every (case, label) decision
    fact_macro_f1: float | None = None  # mean of per-label macro F1

    def to_dict(self) -> dict:
        return {
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "micro_f1": self.micro_f1,
            "confusion": self.confusion.tolist(),
            "per_fact": [
                {"label": f.label, "micro_f1": f.micro_f1, "macro_f1": f.macro_f1}
                for f in self.per_fact
            ],
            "fact_micro_f1": self.fact_micro_f1,
            "fact_macro_f1": self.fact_macro_f1,
        }


def judgment_report(gold: np.ndarray, pred: np.ndarray) -> EvalReport:
    """Claim-level metrics pooled over all claims of all cases."""
    n_classes = len(JUDGMENT_LABELS)
    cm = confusion_matrix(gold, pred, n_classes)
    precision, recall, f1 = precision_recall_f1(cm)
    total = cm.sum()
    correct = np.trace(cm)
    return EvalReport(
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        micro_f1=float(correct / total) if total else 0.0,
        confusion=cm,
    )


def attach_fact_metrics(report: EvalReport, gold: np.ndarray, probs: np.ndarray,
                        threshold: float = 0.5) -> EvalReport:
    """Add per-fact-label and pooled binary metrics to a judgment report.

    gold/probs: [n_cases, z]; a fact counts as predicted when its
    probability clears the threshold.
    """
    pred = (probs >= threshold).astype(np.int64)
    gold = gold.astype(np.int64)
    per_fact = []
    macro_values = []
    for zi, label in enumerate(FACT_LABELS[: gold.shape[1]]):
        cm = confusion_matrix(gold[:, zi], pred[:, zi], 2)
        _, _, f1 = precision_recall_f1(cm)
        micro = float(np.trace(cm) / cm.sum()) if cm.sum() else 0.0
        macro = float(f1.mean())
        per_fact.append(FactLabelReport(label=label, micro_f1=micro, macro_f1=macro))
        macro_values.append(macro)
    report.per_fact = per_fact
    report.fact_micro_f1 = float((pred == gold).mean())
    report.fact_macro_f1 = float(np.mean(macro_values))
    return report


def relative_error_increase(full_f1: float, ablated_f1: float) -> float:
    """RIE = (full - ablated) / (1 - full): error growth relative to the full model."""
    denom = 1.0 - full_f1
    if denom <= 0.0:
        return 0.0 if ablated_f1 >= full_f1 else float("inf")
    return (full_f1 - ablated_f1) / denom
