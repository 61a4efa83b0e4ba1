"""Confusion-matrix construction and the binary metric suite.

A zero-denominator metric is reported as None ("undefined") and excluded
from the text report rather than raising or propagating NaN.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion(preds, labels) -> ConfusionMatrix:
    """Tally predictions against labels; class 1 is positive."""
    if len(preds) != len(labels):
        raise ValueError(f"length mismatch: {len(preds)} preds, {len(labels)} labels")
    if len(preds) == 0:
        raise ValueError("empty input")
    tp = fp = fn = tn = 0
    for p, y in zip(preds, labels):
        if p not in (0, 1) or y not in (0, 1):
            raise ValueError(f"non-binary entry: pred={p}, label={y}")
        if p == 1 and y == 1:
            tp += 1
        elif p == 1 and y == 0:
            fp += 1
        elif p == 0 and y == 1:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def _ratio(num, den) -> float | None:
    return num / den if den > 0 else None


@dataclass
class MetricsReport:
    sensitivity: float | None
    specificity: float | None
    precision: float | None
    npv: float | None
    fpr: float | None
    fdr: float | None
    fnr: float | None
    accuracy: float | None
    f1: float | None
    f_beta: float | None
    beta: float
    mcc: float | None

    def to_dict(self) -> dict:
        return {
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "precision": self.precision,
            "npv": self.npv,
            "fpr": self.fpr,
            "fdr": self.fdr,
            "fnr": self.fnr,
            "accuracy": self.accuracy,
            "f1": self.f1,
            "f_beta": self.f_beta,
            "beta": self.beta,
            "mcc": self.mcc,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def derive_metrics(cm: ConfusionMatrix, beta: float = 1.0) -> MetricsReport:
    tp, fp, fn, tn = cm.tp, cm.fp, cm.fn, cm.tn
    sens = _ratio(tp, tp + fn)
    spec = _ratio(tn, tn + fp)
    prec = _ratio(tp, tp + fp)

    f_beta = None
    if prec is not None and sens is not None:
        den = beta * beta * prec + sens
        if den > 0:
            f_beta = (1 + beta * beta) * prec * sens / den
        elif prec == 0 and sens == 0:
            f_beta = 0.0

    mcc = None
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if den > 0:
        mcc = (tp * tn - fp * fn) / math.sqrt(den)

    return MetricsReport(
        sensitivity=sens,
        specificity=spec,
        precision=prec,
        npv=_ratio(tn, tn + fn),
        fpr=_ratio(fp, fp + tn),
        fdr=_ratio(fp, fp + tp),
        fnr=_ratio(fn, fn + tp),
        accuracy=_ratio(tp + tn, cm.total),
        f1=_ratio(2 * tp, 2 * tp + fp + fn),
        f_beta=f_beta,
        beta=beta,
        mcc=mcc,
    )


_ROWS = [
    ("Sensitivity", "sensitivity", "TPR = TP / (TP + FN)"),
    ("Specificity", "specificity", "SPC = TN / (FP + TN)"),
    ("Precision", "precision", "PPV = TP / (TP + FP)"),
    ("Negative Predictive Value", "npv", "NPV = TN / (TN + FN)"),
    ("False Positive Rate", "fpr", "FPR = FP / (FP + TN)"),
    ("False Discovery Rate", "fdr", "FDR = FP / (FP + TP)"),
    ("False Negative Rate", "fnr", "FNR = FN / (FN + TP)"),
    ("Accuracy", "accuracy", "ACC = (TP + TN) / (P + N)"),
    ("F1 Score", "f1", "F1 = 2TP / (2TP + FP + FN)"),
    ("Matthews Correlation Coefficient", "mcc",
     "MCC = (TP*TN - FP*FN) / sqrt((TP+FP)(TP+FN)(TN+FP)(TN+FN))"),
]


def report_text(report: MetricsReport) -> str:
    """Aligned Measure / Value / Derivation table, 4-decimal values.

    Undefined metrics are left out of the table entirely.
    """
    rows = []
    for name, attr, deriv in _ROWS:
        value = getattr(report, attr)
        if value is None:
            continue
        rows.append((name, f"{value:.4f}", deriv))
    name_w = max(len(r[0]) for r in rows)
    val_w = max(len(r[1]) for r in rows)
    lines = [f"{'Measure':<{name_w}}  {'Value':<{val_w}}  Derivation"]
    for name, val, deriv in rows:
        lines.append(f"{name:<{name_w}}  {val:<{val_w}}  {deriv}")
    return "\n".join(lines)
