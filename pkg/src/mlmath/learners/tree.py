"""CART decision trees (Gini impurity) and bagged random forests.

Split search is exhaustive and vectorised per node: every candidate feature
is sorted once and class counts are accumulated along the sorted order.
Among equally good splits the lowest feature index wins, then the lowest
threshold.  Thresholds are midpoints between consecutive distinct values and
an example goes left when ``x[f] <= threshold``.
"""
from __future__ import annotations

import math

import numpy as np

from ..rng import derive_seed, make_rng

_CHUNK_FLOATS = 8_000_000


def _best_split(Xn, yn, n_classes, features, min_leaf):
    n = len(yn)
    onehot = np.eye(n_classes)[yn]
    total = onehot.sum(axis=0)
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = n - nl
    size_ok = (nl >= min_leaf) & (nr >= min_leaf)
    best = (-np.inf, -1, 0.0)
    step = max(1, _CHUNK_FLOATS // max(1, n * n_classes))
    for s in range(0, len(features), step):
        fc = features[s:s + step]
        V = Xn[:, fc]
        order = np.argsort(V, axis=0, kind="stable")
        Vs = np.take_along_axis(V, order, axis=0)
        L = np.cumsum(onehot[order], axis=0)[:-1]
        R = total - L
        score = (L * L).sum(axis=-1) / nl + (R * R).sum(axis=-1) / nr
        valid = (Vs[1:] > Vs[:-1]) & size_ok
        score = np.where(valid, score, -np.inf)
        pos = np.argmax(score, axis=0)
        per_feature = score[pos, np.arange(len(fc))]
        k = int(np.argmax(per_feature))
        if per_feature[k] > best[0]:
            p = pos[k]
            thr = (float(Vs[p, k]) + float(Vs[p + 1, k])) / 2.0
            if not thr < Vs[p + 1, k]:
                thr = float(Vs[p, k])
            best = (float(per_feature[k]), int(fc[k]), thr)
    return best


class Tree:
    def __init__(self, feature, threshold, left, right, value):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value

    @classmethod
    def grow(cls, X, y, n_classes, max_depth, min_leaf=1, max_features=None, rng=None):
        d = X.shape[1]
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node(idx):
            counts = np.bincount(y[idx], minlength=n_classes)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(int(np.argmax(counts)))
            return len(feature) - 1, counts

        root, counts = new_node(np.arange(len(y)))
        stack = [(root, np.arange(len(y)), 0, counts)]
        while stack:
            node, idx, depth, counts = stack.pop()
            if depth >= max_depth or np.count_nonzero(counts) <= 1 or len(idx) < 2 * min_leaf:
                continue
            if max_features is not None and max_features < d:
                feats = np.sort(rng.choice(d, size=max_features, replace=False))
            else:
                feats = np.arange(d)
            score, f, thr = _best_split(X[idx], y[idx], n_classes, feats, min_leaf)
            if f < 0:
                continue
            go_left = X[idx, f] <= thr
            li, ri = idx[go_left], idx[~go_left]
            ln, lc = new_node(li)
            rn, rc = new_node(ri)
            feature[node], threshold[node] = f, thr
            left[node], right[node] = ln, rn
            stack.append((rn, ri, depth + 1, rc))
            stack.append((ln, li, depth + 1, lc))
        return cls(np.array(feature, dtype=np.int64), np.array(threshold, dtype=np.float64),
                   np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                   np.array(value, dtype=np.int64))

    def apply(self, X):
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return node
            fi = np.where(inner, f, 0)
            go_left = X[rows, fi] <= self.threshold[node]
            nxt = np.where(go_left, self.left[node], self.right[node])
            node = np.where(inner, nxt, node)

    def predict(self, X):
        return self.value[self.apply(np.asarray(X))]

    @property
    def depth(self) -> int:
        depth = np.zeros(len(self.feature), dtype=np.int64)
        for i in range(len(self.feature)):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def state(self) -> dict:
        return {"feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
                "left": self.left.tolist(), "right": self.right.tolist(), "value": self.value.tolist()}

    @classmethod
    def from_state(cls, s):
        return cls(np.array(s["feature"], dtype=np.int64), np.array(s["threshold"], dtype=np.float64),
                   np.array(s["left"], dtype=np.int64), np.array(s["right"], dtype=np.int64),
                   np.array(s["value"], dtype=np.int64))


class DecisionTreeModel:
    def __init__(self, tree: Tree):
        self.tree = tree

    @classmethod
    def fit(cls, X, y, n_classes, hp, seed):
        return cls(Tree.grow(np.asarray(X), y, n_classes, hp["max_depth"], hp["min_leaf"]))

    def predict(self, X):
        return self.tree.predict(X)

    def state(self) -> dict:
        return self.tree.state()

    @classmethod
    def from_state(cls, s):
        return cls(Tree.from_state(s))


def n_split_features(rule, d: int) -> int:
    if rule == "sqrt":
        return max(1, int(math.isqrt(d)))
    if rule in ("all", None):
        return d
    return max(1, min(d, int(rule)))


class RandomForestModel:
    def __init__(self, trees, n_classes):
        self.trees = trees
        self.n_classes = n_classes

    @classmethod
    def fit(cls, X, y, n_classes, hp, seed):
        X = np.asarray(X)
        n, d = X.shape
        m = n_split_features(hp["max_features"], d)
        trees = []
        for t in range(hp["n_trees"]):
            rng = make_rng(derive_seed(seed, "forest_tree", t))
            boot = rng.integers(0, n, size=n)
            trees.append(Tree.grow(X[boot], y[boot], n_classes, hp["max_depth"],
                                   hp["min_leaf"], max_features=m, rng=rng))
        return cls(trees, n_classes)

    def votes(self, X):
        X = np.asarray(X)
        votes = np.zeros((len(X), self.n_classes), dtype=np.int64)
        rows = np.arange(len(X))
        for tree in self.trees:
            np.add.at(votes, (rows, tree.predict(X)), 1)
        return votes

    def predict(self, X):
        return np.argmax(self.votes(X), axis=1)

    def state(self) -> dict:
        return {"n_classes": self.n_classes, "trees": [t.state() for t in self.trees]}

    @classmethod
    def from_state(cls, s):
        return cls([Tree.from_state(t) for t in s["trees"]], s["n_classes"])
