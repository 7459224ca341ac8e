"""Binary classification and segmentation-overlap metrics.

All quantities are fractions in [0, 1] (MCC in [-1, 1]). A metric whose
denominator is zero evaluates to 0 and its name is added to
``MetricReport.degenerate`` so that fitness evaluation never aborts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

__all__ = [
    "ConfusionCounts",
    "MetricReport",
    "METRIC_CONVENTIONS",
    "confusion_from_labels",
    "confusion_from_masks",
    "classification_report",
    "dice",
    "jaccard",
]

# Formulas used by classification_report, emitted alongside reports.
METRIC_CONVENTIONS = {
    "accuracy": "(tp + tn) / (tp + fp + tn + fn)",
    "precision": "tp / (tp + fp)",
    "sensitivity": "tp / (tp + fn)",
    "specificity": "tn / (tn + fp)",
    "npv": "tn / (tn + fn)",
    "f1": "2 tp / (2 tp + fp + fn)",
    "fdr": "fp / (fp + tp)",
    "fnr": "fn / (tp + fn)",
    "fpr": "fp / (fp + tn)",
    "mcc": "(tp tn - fp fn) / sqrt((tp + fp)(tp + fn)(tn + fp)(tn + fn))",
    "dice": "2 |A & B| / (|A| + |B|), 1 when both masks are empty",
    "jaccard": "|A & B| / |A | B|, 1 when both masks are empty",
}


@dataclass(frozen=True)
class ConfusionCounts:
    """Counts of a binary confusion matrix."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn
        )


@dataclass(frozen=True)
class MetricReport:
    accuracy: float
    precision: float
    sensitivity: float
    specificity: float
    npv: float
    f1: float
    fdr: float
    fnr: float
    fpr: float
    mcc: float
    degenerate: frozenset = field(default_factory=frozenset)

    def to_dict(self, percent: bool = False) -> dict:
        """Plain-dict form; ``percent=True`` scales every metric by 100."""
        d = asdict(self)
        d["degenerate"] = sorted(self.degenerate)
        if percent:
            for k, v in d.items():
                if k != "degenerate":
                    d[k] = 100.0 * v
        return d


def _as_bool_array(x, name):
    a = np.asarray(x)
    if a.ndim != 1:
        a = a.ravel()
    if a.dtype != bool:
        if not np.all((a == 0) | (a == 1)):
            raise ValueError(f"{name} must contain only 0/1 or boolean values")
        a = a.astype(bool)
    return a


def confusion_from_labels(pred, truth) -> ConfusionCounts:
    """Tally predicted against true binary labels.

    Parameters
    ----------
    pred, truth : array_like of bool or {0, 1}
        Equal-length, nonempty label sequences.

    Returns
    -------
    ConfusionCounts
    """
    p = _as_bool_array(pred, "pred")
    t = _as_bool_array(truth, "truth")
    if p.size != t.size:
        raise ValueError(f"length mismatch: pred has {p.size}, truth has {t.size}")
    if p.size == 0:
        raise ValueError("label sequences must be nonempty")
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    return ConfusionCounts(tp=tp, fp=fp, tn=p.size - tp - fp - fn, fn=fn)


def confusion_from_masks(pred, truth) -> ConfusionCounts:
    """Pixelwise confusion counts of two equally shaped binary masks."""
    pred = np.asarray(pred, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if pred.shape != truth.shape:
        raise ValueError(f"mask shape mismatch: {pred.shape} vs {truth.shape}")
    return confusion_from_labels(pred.ravel(), truth.ravel())


def _ratio(num, den, name, degenerate):
    if den == 0:
        degenerate.add(name)
        return 0.0
    return num / den


def classification_report(cc: ConfusionCounts) -> MetricReport:
    """Evaluate the full binary metric suite from confusion counts."""
    if cc.total == 0:
        raise ValueError("confusion counts are all zero")
    tp, fp, tn, fn = cc.tp, cc.fp, cc.tn, cc.fn
    flags: set[str] = set()
    mcc_den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if mcc_den == 0:
        flags.add("mcc")
        mcc = 0.0
    else:
        # Integer numerator and product keep this exact up to the final division.
        mcc = (tp * tn - fp * fn) / math.sqrt(mcc_den)
    return MetricReport(
        accuracy=(tp + tn) / cc.total,
        precision=_ratio(tp, tp + fp, "precision", flags),
        sensitivity=_ratio(tp, tp + fn, "sensitivity", flags),
        specificity=_ratio(tn, tn + fp, "specificity", flags),
        npv=_ratio(tn, tn + fn, "npv", flags),
        f1=_ratio(2 * tp, 2 * tp + fp + fn, "f1", flags),
        fdr=_ratio(fp, fp + tp, "fdr", flags),
        fnr=_ratio(fn, tp + fn, "fnr", flags),
        fpr=_ratio(fp, fp + tn, "fpr", flags),
        mcc=mcc,
        degenerate=frozenset(flags),
    )


def _overlap(a, b):
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"mask shape mismatch: {a.shape} vs {b.shape}")
    inter = int(np.count_nonzero(a & b))
    return inter, int(np.count_nonzero(a)), int(np.count_nonzero(b))


def dice(a, b) -> float:
    """Dice overlap of two binary masks; two empty masks score 1."""
    inter, na, nb = _overlap(a, b)
    if na + nb == 0:
        return 1.0
    return 2.0 * inter / (na + nb)


def jaccard(a, b) -> float:
    """Intersection over union of two binary masks; two empty masks score 1."""
    inter, na, nb = _overlap(a, b)
    union = na + nb - inter
    if union == 0:
        return 1.0
    return inter / union
