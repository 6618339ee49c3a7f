"""Number-theory tasks: prime and Liouville windows, n mod p, elliptic-curve a_p vectors."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dataset import DatasetError, LabeledDataset, balance_downsample, cap_per_class
from ..rng import derive_seed, make_rng


class ArithError(DatasetError):
    pass


# --- primes ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PrimeTable:
    limit: int
    odd_is_prime: np.ndarray   # entry i says whether 2i + 1 is prime

    @property
    def primes(self) -> np.ndarray:
        odd = 2 * np.flatnonzero(self.odd_is_prime) + 1
        return np.concatenate([[2], odd]) if self.limit >= 2 else odd

    def delta(self, n):
        """Prime characteristic of n (scalar or array)."""
        n = np.asarray(n, dtype=np.int64)
        if np.any(n > self.limit) or np.any(n < 0):
            raise ArithError(f"value outside sieve range [0, {self.limit}]")
        odd = n % 2 == 1
        out = np.where(odd, self.odd_is_prime[np.where(odd, n // 2, 0)], n == 2)
        return out.astype(np.int64) if out.ndim else int(out)


def prime_sieve(limit: int) -> PrimeTable:
    """Sieve of Eratosthenes over the odd numbers only."""
    if limit < 3:
        raise ArithError("limit must be at least 3")
    size = (limit - 1) // 2 + 1             # odd numbers 1, 3, ..., <= limit
    is_p = np.ones(size, dtype=bool)
    is_p[0] = False                         # 1
    for i in range(1, (math.isqrt(limit) - 1) // 2 + 1):
        if is_p[i]:
            p = 2 * i + 1
            is_p[(p * p) // 2::p] = False
    is_p.flags.writeable = False
    return PrimeTable(limit, is_p)


def omega_table(limit: int) -> np.ndarray:
    """Omega(n), prime factors counted with multiplicity, for 0 <= n <= limit."""
    om = np.zeros(limit + 1, dtype=np.int64)
    for p in prime_sieve(max(limit, 3)).primes:
        pk = int(p)
        while pk <= limit:
            om[pk::pk] += 1
            pk *= int(p)
    return om


def liouville(n: int, table: PrimeTable | None = None) -> int:
    """lambda(n) = (-1)^Omega(n) by trial division."""
    if n < 1:
        raise ArithError("n must be positive")
    primes = table.primes if table is not None else None
    count, m = 0, n
    candidates = primes if primes is not None and primes[-1] >= math.isqrt(n) else None
    it = iter(candidates.tolist()) if candidates is not None else iter(range(2, math.isqrt(n) + 1))
    for d in it:
        if d * d > m:
            break
        while m % d == 0:
            m //= d
            count += 1
    if m > 1:
        count += 1
    return -1 if count % 2 else 1


@dataclass(frozen=True)
class WindowSpec:
    w: int = 100
    k: int = 10_000
    i_max: int = 50_000

    def __post_init__(self):
        if self.w < 1 or self.k < 1 or self.i_max < 1:
            raise ArithError("window size, offset and start range must be positive")

    @property
    def sieve_limit(self) -> int:
        return 2 * (self.i_max + self.w + self.k) + 1


def window_features(values: np.ndarray, spec: WindowSpec):
    """values[j] is the sequence at the odd number 2j + 1.

    Row i - 1 holds values at 2i+1, ..., 2(i+w)+1 (w + 1 entries) and the
    target is the value at 2(i+w+k)+1, for i = 1..i_max.
    """
    i = np.arange(1, spec.i_max + 1)
    idx = i[:, None] + np.arange(spec.w + 1)[None, :]
    return values[idx], values[i + spec.w + spec.k]


def _window_task(values, spec, seed, per_class, task_id, meta):
    X, y = window_features(values, spec)
    ds = LabeledDataset(X.astype(np.int64), y.astype(np.int64), 2, task_id,
                        meta={"feature_kind": "binary", "w": spec.w, "k": spec.k,
                              "i_max": spec.i_max, **meta})
    if per_class is not None:
        ds = cap_per_class(ds, per_class, derive_seed(seed, "cap"))
    return balance_downsample(ds, derive_seed(seed, "balance"))


def gen_prime_window_task(spec: WindowSpec = WindowSpec(), seed: int = 0, per_class: int | None = 9000,
                          table: PrimeTable | None = None) -> LabeledDataset:
    table = table or prime_sieve(spec.sieve_limit)
    if table.limit < spec.sieve_limit:
        raise ArithError(f"sieve up to {table.limit} does not cover {spec.sieve_limit}")
    values = table.odd_is_prime.astype(np.int64)
    return _window_task(values, spec, seed, per_class, "prime-window",
                        {"labels": {"0": "composite", "1": "prime"}})


def gen_liouville_task(spec: WindowSpec = WindowSpec(), seed: int = 0,
                       per_class: int | None = 9000) -> LabeledDataset:
    om = omega_table(spec.sieve_limit)
    lam = np.where(om[1::2] % 2 == 0, 1, 0)        # odd numbers; -1 -> 0, +1 -> 1
    return _window_task(lam, spec, seed, per_class, "liouville-window",
                        {"labels": {"0": "lambda=-1", "1": "lambda=+1"}})


# --- n mod p --------------------------------------------------------------------

def digits(n: int, base: int, width: int) -> list[int]:
    """Most significant digit first, left-padded with zeros to ``width``."""
    out = []
    while n:
        n, r = divmod(n, base)
        out.append(r)
    if len(out) > width:
        raise ArithError(f"{len(out)} digits do not fit width {width}")
    return [0] * (width - len(out)) + out[::-1]


def _digit_matrix(ns: np.ndarray, base: int, width: int) -> np.ndarray:
    powers = base ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return (ns[:, None] // powers[None, :]) % base


def _width(n_max: int, base: int) -> int:
    width, n = 1, int(n_max) // base
    while n:
        n //= base
        width += 1
    return width


def gen_modp_fixed_task(p: int, n_range=(0, 2 ** 16), base: int = 2, seed: int = 0,
                        count: int | None = None) -> LabeledDataset:
    """Digits of n -> n mod p over n in [lo, hi), all of them or ``count`` sampled."""
    lo, hi = int(n_range[0]), int(n_range[1])
    if p < 2:
        raise ArithError("p must be at least 2")
    if base < 2 or lo < 0 or hi <= lo:
        raise ArithError("need base >= 2 and 0 <= lo < hi")
    rng = make_rng(seed, "modp_fixed", p)
    ns = np.arange(lo, hi, dtype=np.int64)
    if count is not None and count < len(ns):
        ns = np.sort(rng.choice(ns, size=count, replace=False))
    width = _width(hi - 1, base)
    ds = LabeledDataset(_digit_matrix(ns, base, width), ns % p, p, f"modp-fixed-{p}",
                        meta={"feature_kind": "integer" if base > 2 else "binary", "p": p,
                              "base": base, "n_range": [lo, hi]})
    return balance_downsample(ds, derive_seed(seed, "balance"))


def gen_modp_variable_task(p_set, n_range=(0, 2 ** 16), seed: int = 0, base: int = 2,
                           per_p: int = 2000) -> LabeledDataset:
    """Digits of n followed by digits of p -> [p divides n].

    For every p, ``per_p / 2`` multiples and as many non-multiples of p are
    drawn uniformly from the range, so the classes are balanced within each p.
    """
    p_set = sorted({int(p) for p in p_set})
    if len(p_set) < 2:
        raise ArithError("need at least two moduli")
    lo, hi = int(n_range[0]), int(n_range[1])
    rng = make_rng(seed, "modp_variable")
    half = per_p // 2
    rows_n, rows_p, labels = [], [], []
    for p in p_set:
        mult = np.arange(((lo + p - 1) // p) * p, hi, p, dtype=np.int64)
        ns = np.arange(lo, hi, dtype=np.int64)
        non = ns[ns % p != 0]
        if len(mult) < half or len(non) < half:
            raise ArithError(f"range too small for {half} examples per class at p={p}")
        rows_n += [rng.choice(mult, half, replace=False), rng.choice(non, half, replace=False)]
        rows_p += [np.full(2 * half, p)]
        labels += [np.ones(half, dtype=np.int64), np.zeros(half, dtype=np.int64)]
    n = np.concatenate(rows_n)
    p = np.concatenate(rows_p)
    y = np.concatenate(labels)
    X = np.hstack([_digit_matrix(n, base, _width(hi - 1, base)),
                   _digit_matrix(p, base, _width(max(p_set), base))])
    perm = rng.permutation(len(y))
    return LabeledDataset(X[perm], y[perm], 2, "modp-variable",
                          meta={"feature_kind": "integer" if base > 2 else "binary",
                                "p_set": p_set, "base": base, "n_range": [lo, hi],
                                "labels": {"0": "p does not divide n", "1": "p divides n"}})


# --- elliptic curves ------------------------------------------------------------

@dataclass(frozen=True)
class EllipticCurve:
    a: int
    b: int
    rank: int | None = None
    torsion: int | None = None
    integer_points: int | None = None

    @property
    def discriminant(self) -> int:
        return -16 * (4 * self.a ** 3 + 27 * self.b ** 2)

    def is_singular(self) -> bool:
        return 4 * self.a ** 3 + 27 * self.b ** 2 == 0

    def has_good_reduction(self, p: int) -> bool:
        return p != 2 and (4 * self.a ** 3 + 27 * self.b ** 2) % p != 0


_CHI_CACHE: dict[int, np.ndarray] = {}


def _chi_table(p: int) -> np.ndarray:
    """Quadratic character of F_p as a lookup table (chi(0) = 0)."""
    t = _CHI_CACHE.get(p)
    if t is None:
        t = -np.ones(p, dtype=np.int64)
        t[(np.arange(1, p, dtype=np.int64) ** 2) % p] = 1
        t[0] = 0
        _CHI_CACHE[p] = t
    return t


def ap_trace(curve: EllipticCurve, p: int) -> int:
    """a_p = p + 1 - #E(F_p) = -sum_x chi(x^3 + a x + b) for good odd primes p."""
    if not curve.has_good_reduction(p):
        raise ArithError(f"bad reduction at p={p}")
    x = np.arange(p, dtype=np.int64)
    f = ((x * x % p) * x + (curve.a % p) * x + curve.b % p) % p
    ap = -int(_chi_table(p)[f].sum())
    if ap * ap > 4 * p:
        raise ArithError(f"Hasse bound violated at p={p}: a_p={ap}")
    return ap


def good_primes(curve: EllipticCurve, N: int, table: PrimeTable | None = None) -> list[int]:
    """The first N primes of good reduction (2 is always skipped)."""
    out, limit = [], 1000
    while True:
        table = table if table is not None and table.limit >= limit else prime_sieve(limit)
        out = [int(p) for p in table.primes if curve.has_good_reduction(int(p))][:N]
        if len(out) == N:
            return out
        limit *= 2


def gen_ap_vectors(curves, N: int = 100) -> np.ndarray:
    """Row j holds a_p of curve j over its first N good primes (bad primes skipped)."""
    table = prime_sieve(4000)
    out = np.empty((len(curves), N), dtype=np.int64)
    for j, c in enumerate(curves):
        if c.is_singular():
            raise ArithError(f"curve {j} (a={c.a}, b={c.b}) is singular")
        ps = good_primes(c, N, table)
        out[j] = [ap_trace(c, p) for p in ps]
    return out


CURVE_HEADER = ["a", "b", "rank", "torsion", "integer_points"]


def load_curve_labels(path) -> list[EllipticCurve]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CURVE_HEADER:
            raise ArithError(f"line 1: header must be {','.join(CURVE_HEADER)}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ArithError(f"line {lineno}: expected 5 fields, found {len(row)}")
            try:
                a, b, rank, tors, ip = (int(v) for v in row)
            except ValueError:
                raise ArithError(f"line {lineno}: fields must be integers") from None
            c = EllipticCurve(a, b, rank, tors, ip)
            if c.is_singular():
                raise ArithError(f"line {lineno}: singular curve a={a}, b={b}")
            if rank < 0 or tors < 1 or ip not in (0, 1):
                raise ArithError(f"line {lineno}: labels out of range")
            out.append(c)
    return out


def gen_curve_task(curves, prop: str, N: int = 100, seed: int = 0, max_rank: int = 2,
                   min_class: int = 1, balance: bool = True) -> LabeledDataset:
    """a_p vectors -> rank (capped at max_rank), torsion order, or integer-point existence.

    Torsion orders are mapped to contiguous classes in increasing order; orders
    with fewer than ``min_class`` curves are dropped.  The mapping is kept in
    ``meta["classes"]``.
    """
    if prop not in ("rank", "torsion", "integer_points"):
        raise ArithError(f"unknown curve property {prop!r}")
    curves = list(curves)
    if prop == "rank":
        raw = np.array([min(c.rank, max_rank) for c in curves])
    elif prop == "torsion":
        raw = np.array([c.torsion for c in curves])
    else:
        raw = np.array([c.integer_points for c in curves])
    values, counts = np.unique(raw, return_counts=True)
    keep_vals = values[counts >= min_class]
    keep = np.isin(raw, keep_vals)
    if len(keep_vals) < 2:
        raise ArithError(f"{prop}: fewer than two classes with at least {min_class} curves")
    curves = [c for c, k in zip(curves, keep) if k]
    y = np.searchsorted(keep_vals, raw[keep])
    X = gen_ap_vectors(curves, N)
    ds = LabeledDataset(X, y, len(keep_vals), f"curve-{prop}",
                        meta={"feature_kind": "integer", "N": N,
                              "classes": [int(v) for v in keep_vals], "n_curves": len(curves)})
    if balance:
        ds = balance_downsample(ds, derive_seed(seed, "balance"))
    return ds
