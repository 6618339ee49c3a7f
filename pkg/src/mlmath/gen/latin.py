"""Latin squares: random generation and recognition of group isotopes."""
from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from ..rng import derive_seed
from .groups import is_associative, is_latin


class LatinError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LatinSquare:
    table: np.ndarray      # symbols 1..n
    provenance: str        # "group" or "non_group"

    @property
    def order(self) -> int:
        return self.table.shape[0]


def _normalize_symbols(sq) -> np.ndarray:
    T = np.asarray(sq)
    if not is_latin(T):
        raise LatinError("not a Latin square")
    _, inv = np.unique(T, return_inverse=True)
    return inv.reshape(T.shape).astype(np.int64)


def principal_loop(sq) -> np.ndarray:
    """The loop isotope x o y = (x / b) . (a \\ y) with a = row 0, b = column 0.

    Returned as a table over 0..n-1 indexed so that 0 is the loop identity.
    """
    L = _normalize_symbols(sq)
    n = L.shape[0]
    row_by_col0 = np.empty(n, dtype=np.int64)
    row_by_col0[L[:, 0]] = np.arange(n)        # x / b: the row i with L[i, 0] = x
    col_by_row0 = np.empty(n, dtype=np.int64)
    col_by_row0[L[0, :]] = np.arange(n)        # a \ y: the column j with L[0, j] = y
    loop = L[row_by_col0[:, None], col_by_row0[None, :]]
    # relabel symbols so the identity L[0, 0] becomes 0, keeping row/column order aligned
    e = L[0, 0]
    order = np.concatenate([[e], np.delete(np.arange(n), e)])
    relabel = np.empty(n, dtype=np.int64)
    relabel[order] = np.arange(n)
    return relabel[loop[np.ix_(order, order)]]


def is_group_table(sq) -> bool:
    """True iff the Latin square is isotopic to the Cayley table of a group.

    By Albert's theorem a quasigroup is isotopic to a group exactly when its
    principal loop isotopes are associative, so one exhaustive associativity
    scan of one loop isotope decides it.
    """
    return is_associative(principal_loop(sq))


def jacobson_matthews(n: int, moves: int, rng: random.Random) -> list:
    """Random Latin square by Jacobson-Matthews moves on the incidence cube.

    Starts from the cyclic square.  The cube entry M[r][c][s] is 1 when cell
    (r, c) holds s; an improper state has exactly one -1 entry.  For every
    line of the cube we keep the list of positions holding +1 so a move
    costs O(1) apart from the two-way choices in improper states.
    """
    M = {}
    rc = [[[(r + c) % n] for c in range(n)] for r in range(n)]   # symbols at (r, c)
    rs = [[[(s - r) % n] for s in range(n)] for r in range(n)]   # columns holding s in row r
    cs = [[[(s - c) % n] for s in range(n)] for c in range(n)]   # rows holding s in column c
    for r in range(n):
        for c in range(n):
            M[(r, c, (r + c) % n)] = 1

    def add(r, c, s, d):
        key = (r, c, s)
        old = M.get(key, 0)
        new = old + d
        if new:
            M[key] = new
        else:
            M.pop(key, None)
        if old == 1:
            rc[r][c].remove(s)
            rs[r][s].remove(c)
            cs[c][s].remove(r)
        if new == 1:
            rc[r][c].append(s)
            rs[r][s].append(c)
            cs[c][s].append(r)

    improper = None
    done = 0
    while done < moves or improper is not None:
        if improper is None:
            r, c = rng.randrange(n), rng.randrange(n)
            cur = rc[r][c][0]
            s = rng.randrange(n - 1)
            s = s + 1 if s >= cur else s
            r1, c1, s1 = cs[c][s][0], rs[r][s][0], cur
        else:
            r, c, s = improper
            r1 = rng.choice(cs[c][s])
            c1 = rng.choice(rs[r][s])
            s1 = rng.choice(rc[r][c])
        for a, b, d in ((r, c, s), (r, c1, s1), (r1, c, s1), (r1, c1, s)):
            add(a, b, d, 1)
        for a, b, d in ((r, c, s1), (r, c1, s), (r1, c, s), (r1, c1, s1)):
            add(a, b, d, -1)
        improper = (r1, c1, s1) if M.get((r1, c1, s1), 0) < 0 else None
        done += 1
    return [[rc[r][c][0] for c in range(n)] for r in range(n)]


def gen_latin_square(n: int, seed: int, moves: int | None = None) -> LatinSquare:
    """Jacobson-Matthews random Latin square over 1..n after 10 n^3 moves (default)."""
    if n < 2:
        raise LatinError("n must be at least 2")
    if moves is None:
        moves = 10 * n ** 3
    rng = random.Random(derive_seed(seed, "latin", n))
    T = np.array(jacobson_matthews(n, moves, rng), dtype=np.int64) + 1
    return LatinSquare(T, "group" if is_group_table(T) else "non_group")
