"""Confusion matrices and the accuracy pair (naive precision, phi).

phi is the chi-squared agreement between actual and predicted labels,
normalised as sqrt(chi2 / (N (n - 1))) (Cramer's V) so that a perfect n-ary
classifier scores 1.  For binary problems it is signed like the classical
Matthews coefficient and coincides with it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class MetricError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 1:
            raise MetricError(f"confusion matrix must be square, got shape {c.shape}")
        if not np.issubdtype(c.dtype, np.integer):
            if not np.all(np.mod(c, 1) == 0):
                raise MetricError("confusion counts must be integers")
        c = c.astype(np.int64)
        if (c < 0).any():
            raise MetricError("confusion counts must be non-negative")
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def tolist(self) -> list:
        return self.counts.tolist()


@dataclass(frozen=True)
class AccuracyPair:
    precision: float
    phi: float

    def as_dict(self) -> dict:
        return {"precision": self.precision, "phi": self.phi}


@dataclass(frozen=True)
class CvSummary:
    per_fold: tuple
    mean_precision: float
    std_precision: float
    mean_phi: float
    std_phi: float

    def as_dict(self) -> dict:
        return {
            "per_fold": [p.as_dict() for p in self.per_fold],
            "mean_precision": self.mean_precision,
            "std_precision": self.std_precision,
            "mean_phi": self.mean_phi,
            "std_phi": self.std_phi,
        }


def confusion_matrix(actual: Sequence[int], predicted: Sequence[int], n: int) -> ConfusionMatrix:
    a = np.asarray(actual, dtype=np.int64).ravel()
    p = np.asarray(predicted, dtype=np.int64).ravel()
    if len(a) != len(p):
        raise MetricError(f"{len(a)} actual labels but {len(p)} predictions")
    if len(a) == 0:
        raise MetricError("no labels")
    for name, v in (("actual", a), ("predicted", p)):
        bad = (v < 0) | (v >= n)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise MetricError(f"{name} label {v[i]} at position {i} outside [0, {n})")
    counts = np.bincount(a * n + p, minlength=n * n).reshape(n, n)
    return ConfusionMatrix(counts)


def _as_counts(M) -> np.ndarray:
    return M.counts if isinstance(M, ConfusionMatrix) else ConfusionMatrix(M).counts


def naive_precision(M) -> float:
    c = _as_counts(M)
    total = c.sum()
    if total == 0:
        raise MetricError("empty confusion matrix")
    return float(np.trace(c) / total)


def chi_squared(M) -> float:
    """Pearson chi^2 against row/column independence, skipping E = 0 cells."""
    c = _as_counts(M).astype(np.float64)
    total = c.sum()
    if total == 0:
        raise MetricError("empty confusion matrix")
    E = np.outer(c.sum(axis=1), c.sum(axis=0)) / total
    live = E > 0
    return float(np.sum((c[live] - E[live]) ** 2 / E[live]))


def matthews_phi(M) -> float:
    c = _as_counts(M)
    n = c.shape[0]
    N = int(c.sum())
    if N == 0:
        raise MetricError("empty confusion matrix")
    if n == 1:
        return 0.0
    phi = math.sqrt(max(chi_squared(c), 0.0) / (N * (n - 1)))
    phi = min(phi, 1.0)
    if n == 2:
        tn, fp, fn, tp = (int(v) for v in c.ravel())
        s = tp * tn - fp * fn
        phi = math.copysign(phi, s) if s else 0.0
    return phi


def accuracy_pair(M) -> AccuracyPair:
    return AccuracyPair(naive_precision(M), matthews_phi(M))


def cross_val_aggregate(pairs: Sequence[AccuracyPair]) -> CvSummary:
    pairs = tuple(pairs)
    if not pairs:
        raise MetricError("no folds to aggregate")
    p = np.array([x.precision for x in pairs], dtype=np.float64)
    f = np.array([x.phi for x in pairs], dtype=np.float64)
    return CvSummary(pairs, float(p.mean()), float(p.std()), float(f.mean()), float(f.std()))
