"""SU(3) tensor products: number of irreducible summands.

Irreps are labelled by Dynkin labels [a, b], i.e. the partition
(a + b, b, 0).  Two independent routes count the summands of r1 x r2:
the Littlewood-Richardson rule restricted to three rows, and brute-force
character arithmetic (Gelfand-Tsetlin weights, then repeatedly peeling off
the irrep of the highest remaining weight).
"""
from __future__ import annotations

from collections import Counter
from functools import lru_cache

import numpy as np

from ..dataset import DatasetError, LabeledDataset, balance_downsample
from ..rng import derive_seed

MAX_WEIGHT = 8


def su3_dim(a: int, b: int) -> int:
    return (a + 1) * (b + 1) * (a + b + 2) // 2


def _check(w):
    a, b = (int(v) for v in w)
    if a < 0 or b < 0:
        raise ValueError(f"Dynkin labels must be non-negative, got {w}")
    return a, b


def _partition(a, b):
    return (a + b, b, 0)


def _dynkin(lam):
    return (lam[0] - lam[1], lam[1] - lam[2])


def _compositions(total, parts, caps):
    """All tuples of ``parts`` non-negative integers summing to ``total`` with entry i <= caps[i]."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for x in range(min(total, caps[0]) + 1):
        for rest in _compositions(total - x, parts - 1, caps[1:]):
            yield (x,) + rest


def _add_strip(shape, counts, rows):
    """Add a horizontal strip with counts[i] boxes to row rows[i]; None if not a valid strip."""
    new = list(shape)
    for r, k in zip(rows, counts):
        new[r] += k
    for r in range(1, 3):
        # horizontal strip: new row r may not pass the old row r-1
        if new[r] > shape[r - 1]:
            return None
    return tuple(new)


@lru_cache(maxsize=None)
def littlewood_richardson(r1, r2) -> tuple:
    """Decomposition of [a1,b1] x [a2,b2] as a sorted tuple of ((a, b), multiplicity)."""
    mu = _partition(*_check(r1))
    nu = _partition(*_check(r2))
    out = Counter()
    big = sum(mu) + sum(nu)
    # label 1 in rows 0..2, label 2 in rows 1..2, label 3 in row 2 (three rows only)
    for x1 in _compositions(nu[0], 3, (big, big, big)):
        s1 = _add_strip(mu, x1, (0, 1, 2))
        if s1 is None:
            continue
        for x2 in _compositions(nu[1], 2, (big, big)):
            # lattice word, read right to left row by row: 2s of row i need 1s from rows above
            if x2[0] > x1[0] or x2[0] + x2[1] > x1[0] + x1[1]:
                continue
            s2 = _add_strip(s1, (0,) + x2, (0, 1, 2))
            if s2 is None:
                continue
            x3 = nu[2]
            if x3 > x2[0]:
                continue
            s3 = _add_strip(s2, (0, 0, x3), (0, 1, 2))
            if s3 is None:
                continue
            out[_dynkin(s3)] += 1
    return tuple(sorted(out.items()))


def _weights(a, b) -> Counter:
    """Weight multiset of [a, b] as GL3 weights (w1, w2) (w3 is fixed by the total)."""
    l1, l2 = a + b, b
    ws = Counter()
    for m1 in range(l2, l1 + 1):
        for m2 in range(0, l2 + 1):
            for m in range(m2, m1 + 1):
                ws[(m, m1 + m2 - m)] += 1
    return ws


def decompose_bruteforce(r1, r2) -> tuple:
    a1, b1 = _check(r1)
    a2, b2 = _check(r2)
    w1, w2 = _weights(a1, b1), _weights(a2, b2)
    total = sum(_partition(a1, b1)) + sum(_partition(a2, b2))
    prod = Counter()
    for (x, y), m in w1.items():
        for (u, v), k in w2.items():
            prod[(x + u, y + v)] += m * k
    out = Counter()
    while prod:
        top = max(prod)                      # lexicographically highest weight is dominant
        w = (top[0], top[1], total - top[0] - top[1])
        a, b = w[0] - w[1], w[1] - w[2]
        mult = prod[top]
        out[(a, b)] += mult
        for (x, y), k in _weights(a, b).items():
            key = (x + w[2], y + w[2])       # shift by full columns to the same total
            prod[key] -= mult * k
            if prod[key] == 0:
                del prod[key]
            elif prod[key] < 0:
                raise ArithmeticError("negative multiplicity while peeling")
    return tuple(sorted(out.items()))


def su3_tensor_terms(r1, r2, bound: int = MAX_WEIGHT) -> int:
    """Number of irreducible summands (with multiplicity) of r1 x r2."""
    for w in (r1, r2):
        a, b = _check(w)
        if a > bound or b > bound:
            raise ValueError(f"weight {list(w)} exceeds the bound {bound}")
    return sum(m for _, m in littlewood_richardson(tuple(r1), tuple(r2)))


def gen_su3_task(max_label: int, seed: int, bound: int = MAX_WEIGHT,
                 balance: bool = False) -> LabeledDataset:
    """Every pair of weights with labels <= bound: (a1, b1, a2, b2) -> term count.

    Counts 1..max_label map to classes 0..max_label-1; counts above
    max_label are merged into the top class.
    """
    if max_label < 2:
        raise DatasetError("max_label must be at least 2")
    r = range(bound + 1)
    X = np.array([(a1, b1, a2, b2) for a1 in r for b1 in r for a2 in r for b2 in r], dtype=np.int64)
    terms = np.array([su3_tensor_terms((x[0], x[1]), (x[2], x[3]), bound) for x in X])
    y = np.minimum(terms, max_label) - 1
    ds = LabeledDataset(X, y, max_label, "su3-terms",
                        meta={"feature_kind": "integer", "labels": "min(terms, max_label) - 1",
                              "bound": bound, "max_label": max_label})
    if balance:
        ds = balance_downsample(ds, derive_seed(seed, "balance"))
    else:
        perm = np.random.Generator(np.random.PCG64(derive_seed(seed, "shuffle"))).permutation(len(ds))
        ds = ds.subset(perm)
    return ds
