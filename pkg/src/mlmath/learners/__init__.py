"""One train/predict contract over the classifier menu.

>>> spec = LearnerSpec("knn", {"k": 1})
>>> model = fit(spec, train)              # doctest: +SKIP
>>> labels = predict_batch(model, valid)  # doctest: +SKIP

Hyper-parameters not given in ``params`` take the defaults in
:data:`DEFAULTS`.  Every learner is a pure function of (spec, data): all
randomness comes from ``spec.seed``.
"""
from __future__ import annotations

import json
import numbers
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from ..dataset import LabeledDataset
from .bayes import NaiveBayesModel
from .knn import KnnModel
from .mlp import LogisticModel, MlpArchitecture, MlpModel, mlp_gradient_check
from .svm import SvmModel
from .tree import DecisionTreeModel, RandomForestModel

MODEL_FORMAT = "mlmath-model"
MODEL_VERSION = 1

KINDS = {
    "mlp": MlpModel,
    "svm": SvmModel,
    "naive_bayes": NaiveBayesModel,
    "logistic": LogisticModel,
    "decision_tree": DecisionTreeModel,
    "random_forest": RandomForestModel,
    "knn": KnnModel,
}

DEFAULTS = {
    "mlp": {"layers": (64, 32), "activation": "relu", "lr": 0.01, "batch_size": 32,
            "epochs": 50, "l2": 0.0},
    "svm": {"kernel": "rbf", "C": 1.0, "gamma": "scale", "tol": 1e-3, "max_iter": 1_000_000,
            "cache_mb": 1024.0},
    "naive_bayes": {"alpha": 1.0, "max_categories": 8},
    "logistic": {"lr": 0.5, "epochs": 200, "l2": 1e-4},
    "decision_tree": {"max_depth": 20, "min_leaf": 1},
    "random_forest": {"n_trees": 100, "max_depth": 20, "min_leaf": 1, "max_features": "sqrt"},
    "knn": {"k": "auto", "metric": "auto"},
}
COMMON = {"standardize": "auto"}


class LearnerError(ValueError):
    pass


def _positive_int(v):
    return isinstance(v, numbers.Integral) and not isinstance(v, bool) and v >= 1


def _positive_real(v):
    return isinstance(v, numbers.Real) and not isinstance(v, bool) and v > 0


def _check(kind: str, p: dict) -> list[str]:
    errs = []

    def need(key, ok, what):
        if not ok(p[key]):
            errs.append(f"{kind}.{key} must be {what}, got {p[key]!r}")

    if p["standardize"] not in ("auto", True, False):
        errs.append(f"standardize must be auto, true or false, got {p['standardize']!r}")
    if kind == "mlp":
        layers = p["layers"]
        if isinstance(layers, numbers.Integral):
            layers = p["layers"] = (int(layers),)
        if not isinstance(layers, (list, tuple)) or not layers or not all(_positive_int(w) for w in layers):
            errs.append(f"mlp.layers must be a non-empty list of positive integers, got {layers!r}")
        else:
            p["layers"] = tuple(int(w) for w in layers)
        if p["activation"] not in ("sigmoid", "relu"):
            errs.append(f"mlp.activation must be sigmoid or relu, got {p['activation']!r}")
        need("lr", _positive_real, "positive")
        need("batch_size", _positive_int, "a positive integer")
        need("epochs", _positive_int, "a positive integer")
        need("l2", lambda v: isinstance(v, numbers.Real) and v >= 0, "non-negative")
    elif kind == "svm":
        if p["kernel"] not in ("rbf", "linear"):
            errs.append(f"svm.kernel must be rbf or linear, got {p['kernel']!r}")
        if p["gamma"] not in ("scale", "auto") and not _positive_real(p["gamma"]):
            errs.append(f"svm.gamma must be positive (or scale/auto), got {p['gamma']!r}")
        need("C", _positive_real, "positive")
        need("tol", _positive_real, "positive")
        need("max_iter", _positive_int, "a positive integer")
        need("cache_mb", _positive_real, "positive")
    elif kind == "naive_bayes":
        need("alpha", _positive_real, "positive")
        need("max_categories", _positive_int, "a positive integer")
    elif kind == "logistic":
        need("lr", _positive_real, "positive")
        need("epochs", _positive_int, "a positive integer")
        need("l2", lambda v: isinstance(v, numbers.Real) and v >= 0, "non-negative")
    elif kind in ("decision_tree", "random_forest"):
        need("max_depth", _positive_int, "a positive integer")
        need("min_leaf", _positive_int, "a positive integer")
        if kind == "random_forest":
            need("n_trees", _positive_int, "a positive integer")
            if p["max_features"] not in ("sqrt", "all") and not _positive_int(p["max_features"]):
                errs.append(f"random_forest.max_features must be sqrt, all or a positive integer")
    elif kind == "knn":
        if p["k"] != "auto" and not _positive_int(p["k"]):
            errs.append(f"knn.k must be a positive integer, got {p['k']!r}")
        if p["metric"] not in ("auto", "hamming", "euclidean"):
            errs.append(f"knn.metric must be auto, hamming or euclidean, got {p['metric']!r}")
    return errs


@dataclass(frozen=True)
class LearnerSpec:
    kind: str
    params: Mapping = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise LearnerError(f"unknown learner kind {self.kind!r} (known: {', '.join(KINDS)})")
        full = {**COMMON, **DEFAULTS[self.kind]}
        unknown = sorted(set(self.params) - set(full))
        if unknown:
            raise LearnerError(f"unknown {self.kind} hyper-parameter(s): {', '.join(unknown)}")
        full.update(self.params)
        errs = _check(self.kind, full)
        if errs:
            raise LearnerError("; ".join(errs))
        if not isinstance(self.seed, numbers.Integral) or not 0 <= self.seed < 2**64:
            raise LearnerError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(self, "_resolved", full)

    @property
    def hyperparameters(self) -> dict:
        return dict(self._resolved)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "params": _jsonable(self.params), "seed": int(self.seed)}


def _jsonable(d):
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


@dataclass(frozen=True, eq=False)
class TrainedModel:
    spec: LearnerSpec
    label_arity: int
    feature_dim: int
    impl: object
    mean: np.ndarray | None = None
    scale: np.ndarray | None = None

    def transform(self, X):
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.feature_dim:
            raise LearnerError(f"expected feature vectors of length {self.feature_dim}, got shape {X.shape}")
        if self.mean is not None:
            return (X - self.mean) / self.scale
        return X


def _wants_standardize(spec: LearnerSpec, ds: LabeledDataset) -> bool:
    s = spec.hyperparameters["standardize"]
    if s == "auto":
        return ds.meta.get("feature_kind") == "real"
    return bool(s)


def fit(spec: LearnerSpec, train: LabeledDataset) -> TrainedModel:
    if not isinstance(spec, LearnerSpec):
        raise LearnerError("fit needs a LearnerSpec")
    if len(train) == 0:
        raise LearnerError("cannot train on an empty dataset")
    if train.n_features == 0:
        raise LearnerError("cannot train on zero-width features")
    X = np.asarray(train.X)
    mean = scale = None
    if _wants_standardize(spec, train):
        X = X.astype(np.float64)
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        X = (X - mean) / scale
    impl = KINDS[spec.kind].fit(X, np.asarray(train.y), train.label_arity,
                                spec.hyperparameters, spec.seed)
    return TrainedModel(spec, train.label_arity, train.n_features, impl, mean, scale)


def predict_batch(model: TrainedModel, data) -> np.ndarray:
    X = data.X if isinstance(data, LabeledDataset) else np.asarray(data)
    if X.ndim == 2 and len(X) == 0:
        return np.zeros(0, dtype=np.int64)
    if X.ndim == 1 and X.size == 0:
        return np.zeros(0, dtype=np.int64)
    Z = model.transform(X)
    return np.asarray(model.impl.predict(Z), dtype=np.int64)


def predict(model: TrainedModel, features) -> int:
    x = np.asarray(features)
    if x.ndim != 1:
        raise LearnerError(f"predict takes one feature vector, got shape {x.shape}")
    return int(predict_batch(model, x.reshape(1, -1))[0])


def save_model(model: TrainedModel, path) -> None:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "spec": model.spec.as_dict(),
        "label_arity": model.label_arity,
        "feature_dim": model.feature_dim,
        "standardize": None if model.mean is None else
        {"mean": model.mean.tolist(), "scale": model.scale.tolist()},
        "state": model.impl.state(),
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_model(path) -> TrainedModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != MODEL_FORMAT:
        raise LearnerError(f"{path}: not a model file")
    if doc.get("version") != MODEL_VERSION:
        raise LearnerError(f"{path}: unsupported model version {doc.get('version')}")
    s = doc["spec"]
    spec = LearnerSpec(s["kind"], s["params"], s["seed"])
    impl = KINDS[spec.kind].from_state(doc["state"])
    st = doc["standardize"]
    mean = scale = None
    if st is not None:
        mean = np.array(st["mean"], dtype=np.float64)
        scale = np.array(st["scale"], dtype=np.float64)
    return TrainedModel(spec, doc["label_arity"], doc["feature_dim"], impl, mean, scale)


__all__ = [
    "DEFAULTS", "KINDS", "LearnerError", "LearnerSpec", "MlpArchitecture", "TrainedModel",
    "fit", "load_model", "mlp_gradient_check", "predict", "predict_batch", "save_model",
]
