"""Geometry tasks: quadratic root multiplicity, real roots, parity, CICY Hodge numbers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dataset import (DatasetError, LabeledDataset, augment_permutations,
                       balance_downsample, dedup, pad_matrices)
from ..rng import derive_seed, make_rng


class GeneratorError(DatasetError):
    pass


# --- quadratics ------------------------------------------------------------

def quadratic_multiplicity(a: complex, b: complex, c: complex) -> int:
    """Number of distinct roots of a z^2 + b z + c (a != 0), exact for Gaussian integers."""
    a, b, c = complex(a), complex(b), complex(c)
    if a == 0:
        raise ValueError("leading coefficient is zero")
    return 1 if b * b - 4 * a * c == 0 else 2


def _multiplicity_labels(F: np.ndarray) -> np.ndarray:
    # b^2 - 4ac in exact integer arithmetic on (Re, Im) parts
    ar, ai, br, bi, cr, ci = (F[:, k].astype(np.int64) for k in range(6))
    dr = br * br - bi * bi - 4 * (ar * cr - ai * ci)
    di = 2 * br * bi - 4 * (ar * ci + ai * cr)
    return np.where((dr == 0) & (di == 0), 0, 1)


def repeated_root_triples(bound: int) -> np.ndarray:
    """Every (a, b, c) in the Gaussian box with a != 0 and b^2 = 4ac, as 6-vectors.

    For each (a, b) the only candidate is c = b^2 / (4a), kept when it is a
    Gaussian integer inside the box.
    """
    r = np.arange(-bound, bound + 1)
    g = np.array([(x, y) for x in r for y in r], dtype=np.int64)
    a = g[(g[:, 0] != 0) | (g[:, 1] != 0)]
    A = np.repeat(a, len(g), axis=0)
    B = np.tile(g, (len(a), 1))
    b2r = B[:, 0] ** 2 - B[:, 1] ** 2
    b2i = 2 * B[:, 0] * B[:, 1]
    qr, qi = 4 * A[:, 0], 4 * A[:, 1]
    norm = qr * qr + qi * qi
    # b^2 * conj(4a) / |4a|^2
    nr = b2r * qr + b2i * qi
    ni = b2i * qr - b2r * qi
    ok = (nr % norm == 0) & (ni % norm == 0)
    cr, ci = nr // norm, ni // norm
    ok &= (np.abs(cr) <= bound) & (np.abs(ci) <= bound)
    out = np.column_stack([A[ok], B[ok], cr[ok], ci[ok]])
    return out[np.lexsort(out.T[::-1])]


def gen_quadratic_multiplicity(count: int, bound: int, seed: int,
                               rare_class: str = "enumerate") -> LabeledDataset:
    """Complex quadratics with Gaussian-integer coefficients, labelled by root count.

    ``count`` triples are drawn uniformly from the box (a = 0 rejected),
    de-duplicated and balanced.  Repeated roots are so rare in a uniform
    draw (about 3e-5 at bound 10) that with ``rare_class="enumerate"`` the
    label-0 class is the exact list of all such triples in the box instead
    of whatever the draw happened to hit; ``rare_class="sample"`` keeps the
    raw draw only.
    """
    if count < 2 or bound < 1:
        raise GeneratorError("need count >= 2 and bound >= 1")
    if rare_class not in ("enumerate", "sample"):
        raise GeneratorError(f"rare_class must be enumerate or sample, got {rare_class!r}")
    rng = make_rng(seed, "quadratic_multiplicity")
    F = rng.integers(-bound, bound + 1, size=(count, 6))
    F = F[(F[:, 0] != 0) | (F[:, 1] != 0)]
    if rare_class == "enumerate":
        F = np.vstack([repeated_root_triples(bound), F])
    y = _multiplicity_labels(F)
    ds = LabeledDataset(F, y, 2, "quadratic-multiplicity",
                        meta={"feature_kind": "integer", "labels": {"0": "r=1", "1": "r=2"},
                              "bound": bound, "count": count, "rare_class": rare_class})
    ds = dedup(ds)
    counts = ds.class_counts()
    if counts.min() == 0:
        raise GeneratorError(f"bound {bound} with {count} draws leaves an empty class: {counts.tolist()}")
    return balance_downsample(ds, derive_seed(seed, "balance"))


def real_root_count(a: int, b: int, c: int) -> int:
    if a == 0:
        raise ValueError("leading coefficient is zero")
    d = b * b - 4 * a * c
    return 0 if d < 0 else (1 if d == 0 else 2)


def gen_quadratic_real_roots(count: int, bound: int, seed: int,
                             rare_class: str = "enumerate") -> LabeledDataset:
    """Real integer quadratics labelled by the number of distinct real roots.

    As for the complex task, the rare double-root class can be completed by
    exact enumeration of the box.
    """
    if count < 2 or bound < 1:
        raise GeneratorError("need count >= 2 and bound >= 1")
    rng = make_rng(seed, "quadratic_real_roots")
    F = rng.integers(-bound, bound + 1, size=(count, 3))
    F = F[F[:, 0] != 0]
    if rare_class == "enumerate":
        r = range(-bound, bound + 1)
        extra = [(a, b, c) for a in r if a for b in r for c in r if b * b == 4 * a * c]
        F = np.vstack([np.array(extra, dtype=np.int64).reshape(-1, 3), F])
    d = F[:, 1] ** 2 - 4 * F[:, 0] * F[:, 2]
    y = np.where(d < 0, 0, np.where(d == 0, 1, 2))
    ds = dedup(LabeledDataset(F, y, 3, "quadratic-real-roots",
                              meta={"feature_kind": "integer", "bound": bound, "count": count}))
    if ds.class_counts().min() == 0:
        raise GeneratorError(f"bound {bound} leaves an empty class: {ds.class_counts().tolist()}")
    return balance_downsample(ds, derive_seed(seed, "balance"))


# --- parity ------------------------------------------------------------------

PARITY_EPS = 1e-6


def gen_parity_functions(count: int, seed: int) -> LabeledDataset:
    """(x, y, -x, y) -> 1 (even) and (x, y, -x, -y) -> 0 (odd), half each.

    (x, y) is uniform on [0, pi] x [-1, 1]; draws with |y| < 1e-6 are
    redrawn so the two classes never share a point.
    """
    if count < 2:
        raise GeneratorError("count must be at least 2")
    rng = make_rng(seed, "parity")
    x = rng.uniform(0.0, math.pi, count)
    y = rng.uniform(-1.0, 1.0, count)
    bad = np.abs(y) < PARITY_EPS
    while bad.any():
        y[bad] = rng.uniform(-1.0, 1.0, int(bad.sum()))
        bad = np.abs(y) < PARITY_EPS
    labels = np.zeros(count, dtype=np.int64)
    labels[: count // 2 + count % 2] = 1
    labels = labels[rng.permutation(count)]
    X = np.column_stack([x, y, -x, np.where(labels == 1, y, -y)])
    return LabeledDataset(X, labels, 2, "parity",
                          meta={"feature_kind": "real", "labels": {"0": "odd", "1": "even"}})


# --- CICY --------------------------------------------------------------------

CICY_ROWS, CICY_COLS = 12, 15
CICY_TOTAL = 7890


@dataclass(frozen=True, eq=False)
class ConfigurationMatrix:
    ambient_dims: tuple
    degrees: np.ndarray          # m x K
    h11: int | None = None
    h21: int | None = None

    def __post_init__(self):
        dims = tuple(int(n) for n in self.ambient_dims)
        q = np.array(self.degrees, dtype=np.int64).reshape(len(dims), -1)
        q.flags.writeable = False
        object.__setattr__(self, "ambient_dims", dims)
        object.__setattr__(self, "degrees", q)

    @property
    def m(self) -> int:
        return len(self.ambient_dims)

    @property
    def K(self) -> int:
        return self.degrees.shape[1]

    def violations(self) -> list[str]:
        errs = []
        if self.m < 1 or self.m > CICY_ROWS:
            errs.append(f"m={self.m} outside [1, {CICY_ROWS}]")
        if self.K < 1 or self.K > CICY_COLS:
            errs.append(f"K={self.K} outside [1, {CICY_COLS}]")
        if any(n < 1 for n in self.ambient_dims):
            errs.append("ambient dimensions must be positive")
        if self.K != sum(self.ambient_dims) - 3:
            errs.append(f"K={self.K} but sum(n) - 3 = {sum(self.ambient_dims) - 3}")
        rows = self.degrees.sum(axis=1)
        for r, (s, n) in enumerate(zip(rows, self.ambient_dims)):
            if s != n + 1:
                errs.append(f"row {r}: degrees sum to {s}, expected n+1 = {n + 1}")
        if self.degrees.size and (self.degrees.min() < 0 or self.degrees.max() > 5):
            errs.append("degrees must lie in [0, 5]")
        if self.h11 is not None and not 1 <= self.h11 <= 19:
            errs.append(f"h11={self.h11} outside [1, 19]")
        return errs

    def is_valid(self) -> bool:
        return not self.violations()

    def permuted(self, row_perm, col_perm) -> "ConfigurationMatrix":
        row_perm, col_perm = np.asarray(row_perm), np.asarray(col_perm)
        return ConfigurationMatrix(tuple(np.asarray(self.ambient_dims)[row_perm]),
                                   self.degrees[row_perm][:, col_perm], self.h11, self.h21)

    def to_line(self) -> str:
        q = " ; ".join(" ".join(str(v) for v in row) for row in self.degrees)
        tail = "" if self.h11 is None else f" | {self.h11} {self.h21 if self.h21 is not None else 0}"
        return f"{self.m} {self.K} | {' '.join(map(str, self.ambient_dims))} | {q}{tail}"


def parse_cicy_line(line: str) -> ConfigurationMatrix:
    parts = [p.strip() for p in line.split("|")]
    if len(parts) not in (3, 4):
        raise ValueError(f"expected 3 or 4 '|'-separated fields, found {len(parts)}")
    head = parts[0].split()
    if len(head) != 2:
        raise ValueError("first field must be 'm K'")
    m, K = int(head[0]), int(head[1])
    dims = [int(v) for v in parts[1].split()]
    rows = [[int(v) for v in r.split()] for r in parts[2].split(";")]
    if len(dims) != m or len(rows) != m:
        raise ValueError(f"m={m} but {len(dims)} dimensions and {len(rows)} degree rows")
    if any(len(r) != K for r in rows):
        raise ValueError(f"every degree row needs K={K} entries")
    h11 = h21 = None
    if len(parts) == 4:
        hh = [int(v) for v in parts[3].split()]
        if len(hh) != 2:
            raise ValueError("last field must be 'h11 h21'")
        h11, h21 = hh
    return ConfigurationMatrix(tuple(dims), np.array(rows, dtype=np.int64).reshape(m, K), h11, h21)


def load_cicy(path) -> list[ConfigurationMatrix]:
    """Read a CICY list; blank lines and ``#`` comments are ignored.

    Raises with the 1-based record number (and file line) of the first
    malformed or invalid record.
    """
    out = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rec = len(out) + 1
        try:
            cfg = parse_cicy_line(line)
        except ValueError as exc:
            raise GeneratorError(f"record {rec} (line {lineno}): {exc}") from None
        errs = cfg.violations()
        if errs:
            raise GeneratorError(f"record {rec} (line {lineno}): {'; '.join(errs)}")
        out.append(cfg)
    return out


def _poly_mul(p, q, caps, max_deg=None):
    out = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            if any(x > cap for x, cap in zip(e, caps)):
                continue
            if max_deg is not None and sum(e) > max_deg:
                continue
            out[e] = out.get(e, 0) + c1 * c2
    return {e: c for e, c in out.items() if c}


def euler_characteristic(cfg: ConfigurationMatrix) -> int:
    """Euler number from the total Chern class.

    c(X) = prod_r (1 + H_r)^(n_r + 1) / prod_j (1 + D_j) with D_j = sum_r q_jr H_r,
    and chi = integral over the ambient space of c_3(X) * prod_j D_j, i.e. the
    coefficient of prod_r H_r^n_r.
    """
    m, caps = cfg.m, cfg.ambient_dims
    zero = (0,) * m
    unit = {zero: 1}

    def H(r):
        return tuple(1 if i == r else 0 for i in range(m))

    c = dict(unit)
    for r, n in enumerate(caps):
        one_plus = {zero: 1, H(r): 1}
        for _ in range(n + 1):
            c = _poly_mul(c, one_plus, caps, 3)
    D = [{H(r): int(cfg.degrees[r, j]) for r in range(m) if cfg.degrees[r, j]} for j in range(cfg.K)]
    for Dj in D:
        # 1 / (1 + D) = 1 - D + D^2 - D^3 up to degree 3
        inv, power = dict(unit), dict(unit)
        for k in range(1, 4):
            power = _poly_mul(power, Dj, caps, 3)
            for e, v in power.items():
                inv[e] = inv.get(e, 0) + (-1) ** k * v
        c = _poly_mul(c, inv, caps, 3)
    top = {e: v for e, v in c.items() if sum(e) == 3}
    for Dj in D:
        top = _poly_mul(top, Dj, caps)
    return int(top.get(tuple(caps), 0))


def gen_cicy_hodge_task(configs, copies: int, seed: int) -> LabeledDataset:
    """Padded 12x15 degree matrices -> h11 - 1, with independent row/column permutations."""
    if not configs:
        raise GeneratorError("no configurations")
    for i, cfg in enumerate(configs):
        if cfg.h11 is None:
            raise GeneratorError(f"configuration {i} has no h11 label")
        errs = cfg.violations()
        if errs:
            raise GeneratorError(f"configuration {i}: {'; '.join(errs)}")
    mats = pad_matrices([c.degrees for c in configs], CICY_ROWS, CICY_COLS, dtype=np.int64)
    y = np.array([c.h11 - 1 for c in configs], dtype=np.int64)
    blocks = np.array([[c.m, c.K] for c in configs])
    ds = LabeledDataset(mats.reshape(len(configs), -1), y, 19, "cicy-h11", (CICY_ROWS, CICY_COLS),
                        meta={"feature_kind": "integer", "labels": "h11 - 1",
                              "n_configs": len(configs), "copies": copies})
    if copies > 0:
        ds = augment_permutations(ds, "independent_rows_cols", copies,
                                  derive_seed(seed, "cicy_augment"), block_shapes=blocks)
    return ds
