"""Evaluation metrics: accuracy, NLL, binned calibration errors, entropy.

Confidence bins are half-open on the left, ((m-1)/M, m/M], with the
(unreachable for argmax confidence) value 0 assigned to the first bin.  The
expected calibration error is computed as the sum of the over- and
under-confidence components, so ECE = OE + UE holds exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

LOG_CLAMP = 1e-12


@dataclass(frozen=True)
class BinStat:
    count: int
    confidence: float
    accuracy: float


def _exact_mean(values: np.ndarray) -> float:
    # summing in sorted order makes every report scalar exactly invariant
    # under permutations of the input
    return float(np.add.reduce(np.sort(values)) / len(values))


@dataclass(frozen=True)
class CalibrationReport:
    acc: float
    nll: float
    ece: float
    oe: float
    ue: float
    bin_count: int
    bins: tuple[BinStat, ...]

    def to_dict(self) -> dict:
        return {
            "acc": self.acc,
            "nll": self.nll,
            "ece": self.ece,
            "oe": self.oe,
            "ue": self.ue,
            "bin_count": self.bin_count,
            "bins": [{"count": b.count, "confidence": b.confidence, "accuracy": b.accuracy}
                     for b in self.bins],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def evaluate(pred_probs: Sequence[Sequence[float]] | np.ndarray,
             true_labels: Sequence[int] | np.ndarray,
             bin_count: int = 15) -> CalibrationReport:
    """Calibration report for predicted probability vectors vs class indices.

    Prediction is the argmax (lowest class index on exact ties), confidence
    the maximum probability.  NLL is the mean negative log probability of the
    true class, with the log argument clamped at 1e-12.
    """
    probs = np.asarray(pred_probs, dtype=np.float64)
    labels = np.asarray(true_labels, dtype=np.int64)
    if probs.ndim != 2 or len(probs) == 0:
        raise ValueError("need a nonempty (n, K) probability array")
    if len(labels) != len(probs):
        raise ValueError(f"{len(probs)} predictions vs {len(labels)} labels")
    if probs.min() < -1e-9 or np.abs(probs.sum(axis=1) - 1.0).max() > 1e-9:
        raise ValueError("rows of pred_probs must lie on the probability simplex")
    k = probs.shape[1]
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"labels must lie in [0, {k})")
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")

    n = len(probs)
    preds = probs.argmax(axis=1)
    conf = probs.max(axis=1)
    correct = (preds == labels).astype(np.float64)
    acc = _exact_mean(correct)
    nll = _exact_mean(-np.log(np.maximum(probs[np.arange(n), labels], LOG_CLAMP)))

    # bin m (1-based) covers ((m-1)/M, m/M]; searchsorted 'left' puts
    # conf == m/M into bin m and conf == 0 into bin 1
    edges = np.array([(m + 1) / bin_count for m in range(bin_count)])
    bin_idx = np.searchsorted(edges, conf, side="left")
    bin_idx = np.minimum(bin_idx, bin_count - 1)

    bins = []
    oe = 0.0
    ue = 0.0
    for m in range(bin_count):
        members = bin_idx == m
        cnt = int(members.sum())
        if cnt == 0:
            bins.append(BinStat(0, 0.0, 0.0))
            continue
        bin_conf = _exact_mean(conf[members])
        bin_acc = _exact_mean(correct[members])
        gap = bin_conf - bin_acc
        oe += (cnt / n) * max(gap, 0.0)
        ue += (cnt / n) * max(-gap, 0.0)
        bins.append(BinStat(cnt, bin_conf, bin_acc))
    return CalibrationReport(acc=acc, nll=nll, ece=oe + ue, oe=oe, ue=ue,
                             bin_count=bin_count, bins=tuple(bins))


def predictive_entropy(prob: Sequence[float] | np.ndarray) -> float:
    """Shannon entropy -sum p log p with the convention 0 log 0 = 0."""
    p = np.asarray(prob, dtype=np.float64)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def predictive_uncertainty(prob: Sequence[float] | np.ndarray, num_classes: int) -> float:
    """1 - sum_k p_k^2, rescaled by 1/(1 - 1/K) so one-hot -> 0 and uniform -> 1."""
    if num_classes < 2:
        raise ValueError("need at least two classes")
    p = np.asarray(prob, dtype=np.float64)
    if p.shape != (num_classes,):
        raise ValueError(f"expected a length-{num_classes} vector, got shape {p.shape}")
    raw = 1.0 - float(p @ p)
    return float(min(max(raw / (1.0 - 1.0 / num_classes), 0.0), 1.0))
