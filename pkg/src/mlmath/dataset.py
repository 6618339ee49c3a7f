"""Labeled datasets and the conditioning steps applied to them.

A :class:`LabeledDataset` holds ``N`` feature vectors as the rows of ``X``
and their category indices in ``y``.  Matrix-valued tasks keep the flattened
matrices in ``X`` and record ``shape = (rows, cols)``.  Datasets are
immutable; every operation here returns a new one and is a pure function of
its inputs and seed.
"""
from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from .rng import make_rng


class DatasetError(ValueError):
    pass


class DataFormatError(DatasetError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Example:
    features: np.ndarray
    label: int


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    X: np.ndarray
    y: np.ndarray
    label_arity: int
    task_id: str = ""
    shape: tuple = ()
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.X)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if X.size else X.reshape(0, 0)
        if X.ndim != 2:
            raise DatasetError(f"features must be a 2-d array, got shape {X.shape}")
        y = np.asarray(self.y)
        if y.size == 0:
            y = y.astype(np.int64)
        if y.ndim != 1 or len(y) != len(X):
            raise DatasetError(f"{len(X)} feature rows but {y.shape} labels")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise DatasetError("labels must be integers")
        y = y.astype(np.int64)
        n = int(self.label_arity)
        if n < 1:
            raise DatasetError("label_arity must be positive")
        if len(y) and (y.min() < 0 or y.max() >= n):
            bad = int(np.flatnonzero((y < 0) | (y >= n))[0])
            raise DatasetError(f"example {bad}: label {y[bad]} outside [0, {n})")
        if np.issubdtype(X.dtype, np.floating) and X.size and not np.isfinite(X).all():
            bad = int(np.flatnonzero(~np.isfinite(X).all(axis=1))[0])
            raise DatasetError(f"example {bad}: non-finite feature value")
        shape = tuple(int(s) for s in self.shape) if self.shape else (X.shape[1],)
        if len(shape) not in (1, 2) or min(shape) < 1 and X.shape[1] > 0:
            raise DatasetError(f"invalid feature shape {shape}")
        if math.prod(shape) != X.shape[1]:
            raise DatasetError(f"feature shape {shape} does not match width {X.shape[1]}")
        X = X.view()
        X.flags.writeable = False
        y = y.view()
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "label_arity", n)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "meta", dict(self.meta))

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def is_matrix(self) -> bool:
        return len(self.shape) == 2

    @property
    def examples(self) -> Iterator[Example]:
        for x, label in zip(self.X, self.y):
            yield Example(x, int(label))

    def matrices(self) -> np.ndarray:
        if not self.is_matrix:
            raise DatasetError("dataset does not hold matrices")
        return self.X.reshape(len(self), *self.shape)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.label_arity)

    def subset(self, index) -> "LabeledDataset":
        index = np.asarray(index, dtype=np.int64)
        return dataclasses.replace(self, X=self.X[index], y=self.y[index])

    def replace(self, **changes) -> "LabeledDataset":
        return dataclasses.replace(self, **changes)

    def summary(self) -> dict:
        return {
            "task": self.task_id,
            "size": len(self),
            "shape": list(self.shape),
            "label_arity": self.label_arity,
            "class_counts": self.class_counts().tolist(),
        }


@dataclass(frozen=True, eq=False)
class SplitResult:
    train: LabeledDataset
    validation: LabeledDataset
    train_index: np.ndarray
    validation_index: np.ndarray


def concat(parts: Sequence[LabeledDataset], **overrides) -> LabeledDataset:
    if not parts:
        raise DatasetError("nothing to concatenate")
    first = parts[0]
    for p in parts[1:]:
        if p.shape != first.shape or p.label_arity != first.label_arity:
            raise DatasetError("cannot concatenate datasets with different shapes or arities")
    X = np.concatenate([p.X for p in parts])
    y = np.concatenate([p.y for p in parts])
    return dataclasses.replace(first, X=X, y=y, **overrides)


def _class_indices(ds: LabeledDataset) -> list[np.ndarray]:
    order = np.argsort(ds.y, kind="stable")
    bounds = np.cumsum(ds.class_counts())[:-1]
    return np.split(order, bounds)


def dedup(ds: LabeledDataset) -> LabeledDataset:
    """Drop repeated feature vectors, keeping the first occurrence."""
    if len(ds) == 0:
        return ds
    _, first = np.unique(np.ascontiguousarray(ds.X), axis=0, return_index=True)
    return ds.subset(np.sort(first))


def balance_downsample(ds: LabeledDataset, seed: int) -> LabeledDataset:
    """Down-sample every class to the size of the smallest one.

    Survivors of each class are a uniform random subset; the result is
    shuffled.
    """
    if len(ds) == 0:
        raise DatasetError("empty dataset")
    counts = ds.class_counts()
    missing = np.flatnonzero(counts == 0)
    if len(missing):
        raise DatasetError(f"label class {int(missing[0])} has no examples")
    m = int(counts.min())
    rng = make_rng(seed, "balance_downsample")
    keep = [rng.choice(idx, size=m, replace=False) for idx in _class_indices(ds)]
    keep = np.concatenate(keep)
    return ds.subset(keep[rng.permutation(len(keep))])


def cap_per_class(ds: LabeledDataset, per_class: int, seed: int) -> LabeledDataset:
    """Uniformly down-sample classes larger than ``per_class``; order is kept."""
    rng = make_rng(seed, "cap_per_class")
    keep = []
    for idx in _class_indices(ds):
        if len(idx) > per_class:
            idx = rng.choice(idx, size=per_class, replace=False)
        keep.append(idx)
    return ds.subset(np.sort(np.concatenate(keep)))


def _block_permutations(rng, n_examples: int, size: int, active) -> np.ndarray:
    """One permutation of ``range(size)`` per example, moving only the first ``active[i]`` slots."""
    keys = rng.random((n_examples, size))
    if active is not None:
        active = np.asarray(active)
        frozen = np.arange(size)[None, :] >= active[:, None]
        keys = np.where(frozen, 2.0 + np.arange(size)[None, :], keys)
    return np.argsort(keys, axis=1, kind="stable")


def augment_permutations(ds: LabeledDataset, mode: str, copies: int, seed: int,
                         block_shapes=None) -> LabeledDataset:
    """Append ``copies`` row/column-permuted versions of every example.

    ``mode="independent_rows_cols"`` draws the row and column permutations
    independently; ``mode="simultaneous"`` applies one permutation to both
    (adjacency matrices).  ``block_shapes`` optionally gives, per example,
    the extent ``(r, c)`` of the top-left block holding the actual content,
    so padding rows and columns stay at the bottom-right.  Originals come
    first, followed by the copies in example order.
    """
    if mode not in ("independent_rows_cols", "simultaneous"):
        raise DatasetError(f"unknown augmentation mode {mode!r}")
    if not ds.is_matrix:
        raise DatasetError("permutation augmentation needs matrix-shaped features")
    if copies < 1:
        raise DatasetError("copies must be positive")
    rows, cols = ds.shape
    if mode == "simultaneous" and rows != cols:
        raise DatasetError(f"simultaneous permutation needs square matrices, got {rows}x{cols}")
    N = len(ds)
    if block_shapes is not None:
        block_shapes = np.asarray(block_shapes, dtype=np.int64).reshape(N, 2)
        if mode == "simultaneous" and np.any(block_shapes[:, 0] != block_shapes[:, 1]):
            raise DatasetError("simultaneous permutation needs square blocks")
        active_r, active_c = block_shapes[:, 0], block_shapes[:, 1]
    else:
        active_r = active_c = None
    rng = make_rng(seed, "augment_permutations", mode)
    M = ds.matrices()
    out_X = [ds.X]
    sel = np.arange(N)[:, None, None]
    for _ in range(copies):
        rp = _block_permutations(rng, N, rows, active_r)
        cp = rp if mode == "simultaneous" else _block_permutations(rng, N, cols, active_c)
        out_X.append(M[sel, rp[:, :, None], cp[:, None, :]].reshape(N, -1))
    X = np.concatenate(out_X)
    y = np.tile(ds.y, copies + 1)
    return ds.replace(X=X, y=y)


def pad_matrices(mats: Sequence[np.ndarray], rows: int, cols: int, dtype=None) -> np.ndarray:
    """Embed each matrix at the top-left of a ``rows x cols`` zero matrix."""
    if dtype is None:
        dtype = np.result_type(*[np.asarray(m).dtype for m in mats]) if len(mats) else np.int64
    out = np.zeros((len(mats), rows, cols), dtype=dtype)
    for i, m in enumerate(mats):
        m = np.asarray(m)
        if m.shape[0] > rows or m.shape[1] > cols:
            raise DatasetError(f"example {i}: {m.shape[0]}x{m.shape[1]} does not fit in {rows}x{cols}")
        out[i, :m.shape[0], :m.shape[1]] = m
    return out


def pad_to_shape(ds: LabeledDataset, rows: int, cols: int) -> LabeledDataset:
    """Re-embed every matrix at the top-left of a ``rows x cols`` zero matrix.

    Shrinking is allowed only when the cropped rows/columns are zero for
    every example.
    """
    if not ds.is_matrix:
        raise DatasetError("padding needs matrix-shaped features")
    r, c = ds.shape
    M = ds.matrices()
    if r > rows or c > cols:
        outside = np.zeros(len(ds), dtype=bool)
        if r > rows:
            outside |= np.any(M[:, rows:, :] != 0, axis=(1, 2))
        if c > cols:
            outside |= np.any(M[:, :, cols:] != 0, axis=(1, 2))
        if outside.any():
            bad = int(np.flatnonzero(outside)[0])
            raise DatasetError(f"example {bad} does not fit in {rows}x{cols}")
    out = np.zeros((len(ds), rows, cols), dtype=ds.X.dtype)
    rr, cc = min(r, rows), min(c, cols)
    out[:, :rr, :cc] = M[:, :rr, :cc]
    return ds.replace(X=out.reshape(len(ds), -1), shape=(rows, cols))


def _largest_remainder(quotas: np.ndarray, total: int) -> np.ndarray:
    base = np.floor(quotas + 1e-9).astype(np.int64)
    short = total - int(base.sum())
    if short > 0:
        rem = quotas - base
        order = np.lexsort((np.arange(len(quotas)), -rem))
        base[order[:short]] += 1
    return base


def split_train_val(ds: LabeledDataset, train_fraction: float, seed: int) -> SplitResult:
    """Stratified random split.

    The validation size is ``floor((1 - f) * N)``; it is shared out over the
    classes by largest remainder (ties to the lower label), so every class is
    split at the requested fraction to within one example.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError(f"train fraction must lie in (0, 1), got {train_fraction}")
    if len(ds) < 2:
        raise DatasetError("need at least 2 examples to split")
    rng = make_rng(seed, "split_train_val")
    n_val = int(math.floor((1.0 - train_fraction) * len(ds) + 1e-9))
    groups = _class_indices(ds)
    quotas = np.array([(1.0 - train_fraction) * len(g) for g in groups])
    per_class = _largest_remainder(quotas, n_val)
    train_idx, val_idx = [], []
    for g, k in zip(groups, per_class):
        g = g[rng.permutation(len(g))]
        val_idx.append(g[:k])
        train_idx.append(g[k:])
    train_idx = np.concatenate(train_idx)
    val_idx = np.concatenate(val_idx)
    train_idx = train_idx[rng.permutation(len(train_idx))]
    val_idx = val_idx[rng.permutation(len(val_idx))]
    return SplitResult(ds.subset(train_idx), ds.subset(val_idx), train_idx, val_idx)


def kfold(ds: LabeledDataset, k: int, seed: int) -> list[SplitResult]:
    """Stratified k-fold partition; part sizes differ by at most one."""
    if k < 2:
        raise DatasetError(f"k must be at least 2, got {k}")
    if k > len(ds):
        raise DatasetError(f"k={k} exceeds dataset size {len(ds)}")
    rng = make_rng(seed, "kfold")
    order = np.concatenate([g[rng.permutation(len(g))] for g in _class_indices(ds)])
    fold_of = np.empty(len(ds), dtype=np.int64)
    fold_of[order] = np.arange(len(ds)) % k
    out = []
    for i in range(k):
        val_idx = np.flatnonzero(fold_of == i)
        train_idx = np.flatnonzero(fold_of != i)
        val_idx = val_idx[rng.permutation(len(val_idx))]
        train_idx = train_idx[rng.permutation(len(train_idx))]
        out.append(SplitResult(ds.subset(train_idx), ds.subset(val_idx), train_idx, val_idx))
    return out


# --- CSV ---------------------------------------------------------------------

_INT_RE = re.compile(r"^-?\d+$")


def _format_row(values, integral: bool) -> str:
    if integral:
        return ",".join(str(int(v)) for v in values)
    return ",".join(format(float(v), ".17g") for v in values)


def write_csv(ds: LabeledDataset, path) -> None:
    """Write ``ds`` in the shared CSV layout (sidecar line, header, rows)."""
    shape = "x".join(str(s) for s in ds.shape)
    task = ds.task_id or "-"
    if any(ch.isspace() for ch in task):
        raise DatasetError("task id may not contain whitespace")
    integral = np.issubdtype(ds.X.dtype, np.integer) or np.issubdtype(ds.X.dtype, np.bool_)
    lines = [f"# shape={shape} labels={ds.label_arity} task={task}",
             ",".join([f"f{i}" for i in range(ds.n_features)] + ["label"])]
    for x, label in zip(ds.X, ds.y):
        lines.append(_format_row(x, integral) + f",{int(label)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_csv(path) -> LabeledDataset:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith("# "):
        raise DataFormatError("missing '# shape=... labels=... task=...' line", 1)
    meta = {}
    for tok in lines[0][2:].split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise DataFormatError(f"bad metadata token {tok!r}", 1)
        meta[key] = val
    try:
        shape = tuple(int(s) for s in meta["shape"].split("x"))
        n_labels = int(meta["labels"])
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"bad metadata line ({exc})", 1) from None
    task = meta.get("task", "")
    if task == "-":
        task = ""
    if len(lines) < 2:
        raise DataFormatError("missing header line", 2)
    header = lines[1].split(",")
    d = len(header) - 1
    expected = [f"f{i}" for i in range(d)] + ["label"]
    if header != expected:
        raise DataFormatError("header must read f0,...,f{d-1},label", 2)
    if math.prod(shape) != d:
        raise DataFormatError(f"shape {meta['shape']} does not match {d} feature columns", 1)
    rows, labels = [], []
    integral = True
    for lineno, line in enumerate(lines[2:], start=3):
        if line.endswith("\r"):
            raise DataFormatError("CRLF line ending", lineno)
        toks = line.split(",")
        if len(toks) != d + 1:
            raise DataFormatError(f"expected {d + 1} fields, found {len(toks)}", lineno)
        if not _INT_RE.match(toks[-1]):
            raise DataFormatError(f"label {toks[-1]!r} is not an integer", lineno)
        label = int(toks[-1])
        if not 0 <= label < n_labels:
            raise DataFormatError(f"label {label} outside [0, {n_labels})", lineno)
        feats = toks[:-1]
        if integral and not all(_INT_RE.match(t) for t in feats):
            integral = False
        try:
            row = [float(t) for t in feats] if not integral else feats
            if not integral and not all(math.isfinite(v) for v in row):
                raise ValueError("non-finite value")
        except ValueError as exc:
            raise DataFormatError(f"malformed feature ({exc})", lineno) from None
        rows.append(row)
        labels.append(label)
    if integral:
        X = np.array([[int(t) for t in r] for r in rows], dtype=np.int64).reshape(len(rows), d)
    else:
        X = np.array([[float(t) for t in r] for r in rows], dtype=np.float64).reshape(len(rows), d)
    return LabeledDataset(X, np.array(labels, dtype=np.int64), n_labels, task,
                          shape if len(shape) == 2 else (), {})
