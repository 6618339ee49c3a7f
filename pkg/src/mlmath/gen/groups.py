"""Finite groups as Cayley tables, built from first principles.

Elements are 0..n-1 with 0 the identity; ``table[a, b]`` is the index of
``a * b``.  Feature matrices shown to learners use the symbols 1..n so that
0 can serve as padding.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


class GroupError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n ** 0.5) + 1))


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    name: str
    table: np.ndarray
    is_simple: bool

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @property
    def order(self) -> int:
        return self.table.shape[0]

    def symbols(self) -> np.ndarray:
        """The table over symbols 1..n."""
        return self.table + 1


def _declared_simple(order: int, name: str) -> bool:
    # up to order 70 the simple groups are C_p and A5
    return is_prime(order) or name == "A5"


def _from_elements(name, elements, mul, identity) -> FiniteGroup:
    elements = list(elements)
    elements.remove(identity)
    elements.insert(0, identity)
    index = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    table = np.empty((n, n), dtype=np.int64)
    for i, a in enumerate(elements):
        for j, b in enumerate(elements):
            table[i, j] = index[mul(a, b)]
    return FiniteGroup(name, table, _declared_simple(n, name))


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise GroupError("cyclic group needs n >= 1")
    i = np.arange(n)
    return FiniteGroup(f"C{n}", (i[:, None] + i[None, :]) % n, _declared_simple(n, ""))


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the regular n-gon, order 2n; elements r^i s^j."""
    if n < 2:
        raise GroupError("dihedral group needs n >= 2")
    elements = [(i, j) for j in range(2) for i in range(n)]

    def mul(x, y):
        (i, j), (k, l) = x, y
        return ((i + (k if j == 0 else -k)) % n, (j + l) % 2)

    return _from_elements(f"D{n}", elements, mul, (0, 0))


def dicyclic(n: int) -> FiniteGroup:
    """Dic_n = <a, b | a^(2n) = 1, b^2 = a^n, b a b^-1 = a^-1>, order 4n (Dic_2 = Q8).

    Elements are a^i b^j with 0 <= i < 2n, j in {0, 1}; b a^k = a^-k b and b^2 = a^n.
    """
    if n < 2:
        raise GroupError("dicyclic group needs n >= 2")
    m = 2 * n
    elements = [(i, j) for j in range(2) for i in range(m)]

    def mul(x, y):
        (i, j), (k, l) = x, y
        if j == 0:
            return ((i + k) % m, l)
        i2 = (i - k) % m
        if l == 0:
            return (i2, 1)
        return ((i2 + n) % m, 0)

    return _from_elements(f"Dic{n}", elements, mul, (0, 0))


def quaternion8() -> FiniteGroup:
    # unit quaternions as (sign, axis) with axis 0=1, 1=i, 2=j, 3=k
    prod = {
        (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
        (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
        (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
        (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
    }
    elements = [(s, a) for s in (1, -1) for a in range(4)]

    def mul(x, y):
        s, a = prod[(x[1], y[1])]
        return (x[0] * y[0] * s, a)

    return _from_elements("Q8", elements, mul, (1, 0))


def _perm_sign(p) -> int:
    sign, seen = 1, [False] * len(p)
    for i in range(len(p)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            sign *= -1 if length % 2 == 0 else 1
    return sign


def symmetric(n: int) -> FiniteGroup:
    if not 1 <= n <= 5:
        raise GroupError("symmetric groups are supported for n <= 5")
    perms = list(itertools.permutations(range(n)))
    return _from_elements(f"S{n}", perms, lambda p, q: tuple(p[q[i]] for i in range(n)),
                          tuple(range(n)))


def alternating(n: int) -> FiniteGroup:
    if not 1 <= n <= 5:
        raise GroupError("alternating groups are supported for n <= 5")
    perms = [p for p in itertools.permutations(range(n)) if _perm_sign(p) == 1]
    return _from_elements(f"A{n}", perms, lambda p, q: tuple(p[q[i]] for i in range(n)),
                          tuple(range(n)))


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """(g, h) has index g * |H| + h, so the identity stays at 0."""
    m = H.order
    a = np.arange(G.order * m)
    g, h = a // m, a % m
    table = G.table[g[:, None], g[None, :]] * m + H.table[h[:, None], h[None, :]]
    name = f"{G.name}x{H.name}"
    return FiniteGroup(name, table, _declared_simple(len(a), name))


FAMILIES = {
    "cyclic": cyclic,
    "dihedral": dihedral,
    "dicyclic": dicyclic,
    "quaternion8": quaternion8,
    "symmetric": symmetric,
    "alternating": alternating,
    "direct_product": direct_product,
}


def build_group(family: str, *args) -> FiniteGroup:
    """``build_group("cyclic", 5)``, ``build_group("direct_product", G, H)`` and so on."""
    if family not in FAMILIES:
        raise GroupError(f"unsupported family {family!r}")
    try:
        return FAMILIES[family](*args)
    except TypeError as exc:
        raise GroupError(f"bad arguments for {family}: {exc}") from None


# --- axioms and simplicity -------------------------------------------------

def is_latin(T) -> bool:
    T = np.asarray(T)
    if T.ndim != 2 or T.shape[0] != T.shape[1] or T.size == 0:
        return False
    syms = np.sort(T[0])
    if len(np.unique(syms)) != len(syms):
        return False
    s = np.sort(T, axis=1)
    c = np.sort(T, axis=0)
    return bool((s == syms[None, :]).all() and (c == syms[:, None]).all())


def is_associative(T) -> bool:
    """Exhaustive check of (ab)c = a(bc) over all n^3 triples (0-based table)."""
    T = np.asarray(T)
    return bool(np.array_equal(T[T, :], T[:, T]))


def check_group_axioms(T) -> list[str]:
    T = np.asarray(T)
    n = T.shape[0]
    errs = []
    if not is_latin(T) or set(np.unique(T)) != set(range(n)):
        return ["not a Latin square over 0..n-1"]
    if not (np.array_equal(T[0], np.arange(n)) and np.array_equal(T[:, 0], np.arange(n))):
        errs.append("element 0 is not the identity")
    if not (T == 0).any(axis=1).all():
        errs.append("missing inverse")
    if not is_associative(T):
        errs.append("not associative")
    return errs


def subgroup_generated(T, gens) -> frozenset:
    T = np.asarray(T)
    elems = {0}
    frontier = [0]
    gens = list(gens)
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = int(T[x, g])
            if y not in elems:
                elems.add(y)
                frontier.append(y)
    return frozenset(elems)


def normal_closure(T, g: int) -> frozenset:
    """Smallest normal subgroup containing g: generated by all conjugates of g."""
    T = np.asarray(T)
    n = T.shape[0]
    inv = np.argmax(T == 0, axis=1)
    conj = {int(T[T[x, g], inv[x]]) for x in range(n)}
    return subgroup_generated(T, conj)


def is_simple_bruteforce(T) -> bool:
    """A group is simple iff every non-identity element has the whole group as normal closure."""
    n = np.asarray(T).shape[0]
    if n == 1:
        return False
    return all(len(normal_closure(T, g)) == n for g in range(1, n))


# --- catalog ------------------------------------------------------------------

ORDER12 = ("C12", "C6xC2", "D6", "A4", "Dic3")


def order12_groups() -> list[FiniteGroup]:
    return [cyclic(12), direct_product(cyclic(6), cyclic(2)), dihedral(6), alternating(4), dicyclic(3)]


def catalog(max_order: int = 70) -> list[FiniteGroup]:
    """The constructible groups used by the simplicity task (84 groups up to order 70).

    Simple: C_p for the 19 primes p <= 67 and A5.  Non-simple: the Klein
    group, D_n for n = 3..35, the odd composite cyclic groups, and a handful
    of others (Q8, A4, S4, Dic3, C2^3, C3xC3, S3xC3, A4xC5, C4, C6, C8, C12,
    C60, C2xC30).
    """
    groups = [cyclic(p) for p in range(2, 68) if is_prime(p)]
    groups.append(alternating(5))
    c2, c3 = cyclic(2), cyclic(3)
    groups.append(direct_product(c2, c2))
    groups += [dihedral(n) for n in range(3, 36)]
    groups += [cyclic(n) for n in (9, 15, 21, 25, 27, 33, 35, 39, 45, 49, 51, 55, 57, 63, 65, 69)]
    groups += [
        quaternion8(), alternating(4), symmetric(4), dicyclic(3),
        direct_product(direct_product(c2, c2), c2), direct_product(c3, c3),
        direct_product(symmetric(3), c3), direct_product(alternating(4), cyclic(5)),
        cyclic(4), cyclic(6), cyclic(8), cyclic(12), cyclic(60),
        direct_product(c2, cyclic(30)),
    ]
    return [g for g in groups if g.order <= max_order]
