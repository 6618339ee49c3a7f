"""k-nearest neighbours with exact, documented tie-breaking.

Neighbours are ranked by (distance, training index), so equal distances go
to the earlier training example.  The vote is a plain count over the k
neighbours and ties go to the lower label.  Hamming distances on 0/1 data
are computed through a float matrix product, which is exact for integer
counts; Euclidean distances are squared differences summed directly so
equal points really compare equal.
"""
from __future__ import annotations

import numpy as np


def is_binary(X) -> bool:
    X = np.asarray(X)
    return X.size > 0 and bool(np.all((X == 0) | (X == 1)))


class KnnModel:
    def __init__(self, X, y, n_classes, k, metric):
        self.X = np.asarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.int64)
        self.n_classes = n_classes
        self.k = min(int(k), len(self.y))
        self.metric = metric

    @classmethod
    def fit(cls, X, y, n_classes, hp, seed):
        binary = is_binary(X)
        metric = hp["metric"]
        if metric == "auto":
            metric = "hamming" if binary else "euclidean"
        k = hp["k"]
        if k == "auto":
            k = 50 if binary else 5
        if metric == "hamming" and not binary:
            raise ValueError("hamming distance needs 0/1 features")
        return cls(X, y, n_classes, k, metric)

    def distances(self, Z):
        Z = np.asarray(Z, dtype=np.float64)
        if self.metric == "hamming":
            ones = self.X.sum(axis=1)
            return Z.sum(axis=1)[:, None] + ones[None, :] - 2.0 * (Z @ self.X.T)
        d = self.X.shape[1]
        step = max(1, 4_000_000 // max(1, len(self.X) * d))
        out = np.empty((len(Z), len(self.X)))
        for s in range(0, len(Z), step):
            diff = Z[s:s + step, None, :] - self.X[None, :, :]
            out[s:s + step] = np.einsum("ijk,ijk->ij", diff, diff)
        return out

    def neighbours(self, Z, chunk: int = 512):
        """Indices of the k nearest training examples, nearest first."""
        out = []
        for s in range(0, len(Z), chunk):
            D = self.distances(Z[s:s + chunk])
            out.append(np.argsort(D, axis=1, kind="stable")[:, :self.k])
        return np.concatenate(out) if out else np.zeros((0, self.k), dtype=np.int64)

    def predict(self, Z):
        Z = np.asarray(Z)
        if len(Z) == 0:
            return np.zeros(0, dtype=np.int64)
        nb = self.neighbours(Z)
        labels = self.y[nb]
        votes = np.zeros((len(Z), self.n_classes), dtype=np.int64)
        for c in range(self.n_classes):
            votes[:, c] = (labels == c).sum(axis=1)
        return np.argmax(votes, axis=1)

    def state(self) -> dict:
        return {"X": self.X.tolist(), "y": self.y.tolist(), "n_classes": self.n_classes,
                "k": self.k, "metric": self.metric}

    @classmethod
    def from_state(cls, s):
        X = np.array(s["X"], dtype=np.float64).reshape(len(s["y"]), -1)
        return cls(X, s["y"], s["n_classes"], s["k"], s["metric"])
