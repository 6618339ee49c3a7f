"""Naive Bayes with a per-feature event model.

A feature with at most ``max_categories`` distinct training values is
treated as categorical over those values plus one catch-all slot for values
never seen in training; any other feature is binarized at its training
median (``x > median``).  All counts get Laplace smoothing ``alpha``.
"""
from __future__ import annotations

import numpy as np


class NaiveBayesModel:
    def __init__(self, log_prior, kinds, values, medians, log_lik):
        self.log_prior = log_prior  # (n,)
        self.kinds = kinds          # per feature: 1 = categorical, 0 = binarized
        self.values = values        # per feature: sorted category values (categorical only)
        self.medians = medians
        self.log_lik = log_lik      # per feature: (n_classes, n_slots)

    @classmethod
    def fit(cls, X, y, n_classes, hp, seed):
        X = np.asarray(X)
        alpha, max_cat = hp["alpha"], hp["max_categories"]
        counts = np.bincount(y, minlength=n_classes).astype(np.float64)
        log_prior = np.log((counts + alpha) / (counts.sum() + alpha * n_classes))
        kinds, values, medians, log_lik = [], [], [], []
        for f in range(X.shape[1]):
            col = X[:, f]
            uniq = np.unique(col)
            if len(uniq) <= max_cat:
                kinds.append(1)
                values.append(uniq.astype(np.float64))
                medians.append(0.0)
                slots = np.searchsorted(uniq, col)
                n_slots = len(uniq) + 1
            else:
                med = float(np.median(col))
                kinds.append(0)
                values.append(np.zeros(0))
                medians.append(med)
                slots = (col > med).astype(np.int64)
                n_slots = 2
            table = np.zeros((n_classes, n_slots))
            np.add.at(table, (y, slots), 1.0)
            table += alpha
            log_lik.append(np.log(table / table.sum(axis=1, keepdims=True)))
        return cls(log_prior, np.array(kinds), values, np.array(medians), log_lik)

    def _slots(self, f, col):
        if self.kinds[f]:
            vals = self.values[f]
            pos = np.searchsorted(vals, col)
            hit = (pos < len(vals)) & (vals[np.minimum(pos, len(vals) - 1)] == col)
            return np.where(hit, pos, len(vals))
        return (col > self.medians[f]).astype(np.int64)

    def log_posterior(self, X):
        """Unnormalized log posteriors, shape (N, n_classes)."""
        X = np.asarray(X)
        out = np.tile(self.log_prior, (len(X), 1))
        for f in range(X.shape[1]):
            out += self.log_lik[f][:, self._slots(f, X[:, f])].T
        return out

    def predict(self, X):
        return np.argmax(self.log_posterior(X), axis=1)

    def state(self) -> dict:
        return {"log_prior": self.log_prior.tolist(), "kinds": self.kinds.tolist(),
                "values": [v.tolist() for v in self.values], "medians": self.medians.tolist(),
                "log_lik": [t.tolist() for t in self.log_lik]}

    @classmethod
    def from_state(cls, s):
        return cls(np.array(s["log_prior"]), np.array(s["kinds"], dtype=np.int64),
                   [np.array(v, dtype=np.float64) for v in s["values"]],
                   np.array(s["medians"], dtype=np.float64),
                   [np.array(t, dtype=np.float64) for t in s["log_lik"]])
