"""Connected simple graphs, exact property oracles, and the graph classification tasks."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from ..dataset import DatasetError, LabeledDataset, augment_permutations, pad_matrices
from ..rng import derive_seed, make_rng
from .planarity import lr_planar

HAMILTON_MAX_V = 24
GIRTH_CLASSES = ("acyclic", "3", "4", "gt4")


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    adjacency: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.adjacency)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise GraphError(f"adjacency must be square, got shape {A.shape}")
        if not np.isin(A, (0, 1)).all():
            raise GraphError("adjacency must be binary")
        if not np.array_equal(A, A.T):
            raise GraphError("adjacency must be symmetric")
        if np.any(np.diag(A)):
            raise GraphError("adjacency must have a zero diagonal")
        A = A.astype(np.uint8)
        A.flags.writeable = False
        object.__setattr__(self, "adjacency", A)
        if not self.is_connected:
            raise GraphError("graph is not connected")

    @classmethod
    def from_edges(cls, v: int, edges) -> "Graph":
        A = np.zeros((v, v), dtype=np.uint8)
        for a, b in edges:
            A[a, b] = A[b, a] = 1
        return cls(A)

    @property
    def v(self) -> int:
        return self.adjacency.shape[0]

    @cached_property
    def neighbours(self) -> list:
        return [tuple(np.flatnonzero(row).tolist()) for row in self.adjacency]

    @cached_property
    def edges(self) -> list:
        iu = np.triu_indices(self.v, 1)
        mask = self.adjacency[iu] == 1
        return list(zip(iu[0][mask].tolist(), iu[1][mask].tolist()))

    @property
    def e(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1).astype(np.int64)

    @cached_property
    def is_connected(self) -> bool:
        seen = {0}
        queue = deque([0])
        nb = self.neighbours
        while queue:
            x = queue.popleft()
            for y in nb[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return len(seen) == self.v

    def relabel(self, perm) -> "Graph":
        """P A P^T: vertex i of the result is vertex perm[i] of self."""
        perm = np.asarray(perm)
        return Graph(self.adjacency[np.ix_(perm, perm)])

    @cached_property
    def labels(self) -> dict:
        """Every oracle evaluated once (Hamiltonicity only within the exact bound)."""
        g, cls = girth(self)
        out = {"acyclic": is_acyclic(self), "girth": g, "girth_class": cls,
               "planar": is_planar(self), "euler": is_eulerian(self)}
        if self.v <= HAMILTON_MAX_V:
            out["hamilton"] = has_hamiltonian_cycle(self)
        return out


# --- oracles -------------------------------------------------------------------

def is_acyclic(g: Graph) -> bool:
    return g.e == g.v - 1


def girth(g: Graph):
    """(exact girth or math.inf, class in {acyclic, 3, 4, gt4}).

    A BFS from every root r finds the shortest cycle through r: the first
    non-tree edge (x, y) met gives a closed walk of length d(x) + d(y) + 1,
    and the minimum over all roots is the girth.
    """
    best = math.inf
    nb = g.neighbours
    for r in range(g.v):
        dist = [-1] * g.v
        parent = [-1] * g.v
        dist[r] = 0
        queue = deque([r])
        while queue:
            x = queue.popleft()
            if 2 * dist[x] + 1 >= best:
                break
            for y in nb[x]:
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
                elif parent[x] != y:
                    best = min(best, dist[x] + dist[y] + 1)
    if best == math.inf:
        return best, "acyclic"
    return int(best), ("3" if best == 3 else "4" if best == 4 else "gt4")


def is_planar(g: Graph) -> bool:
    return lr_planar(g.v, g.edges)


def is_eulerian(g: Graph) -> bool:
    """Euler's theorem: a connected graph has an Euler cycle iff every degree is even."""
    return bool(np.all(g.degrees % 2 == 0))


def has_hamiltonian_cycle(g: Graph) -> bool:
    """Exact backtracking over paths from vertex 0 with bitmask pruning.

    A partial path is abandoned when an unvisited vertex has fewer than two
    usable neighbours, or when the unvisited vertices cannot all be reached
    from the path's end; failed (visited set, end) states are memoised.
    """
    v = g.v
    if v > HAMILTON_MAX_V:
        raise GraphError(f"v={v} exceeds exact-oracle bound {HAMILTON_MAX_V}")
    if v < 3:
        return False
    nb = [0] * v
    for a, b in g.edges:
        nb[a] |= 1 << b
        nb[b] |= 1 << a
    if any(bin(m).count("1") < 2 for m in nb):
        return False
    full = (1 << v) - 1
    failed = set()

    def feasible(visited, end):
        free = full & ~visited
        usable = free | (1 << end) | 1
        m = free
        while m:
            low = m & -m
            u = low.bit_length() - 1
            if bin(nb[u] & usable).count("1") < 2:
                return False
            m ^= low
        # every free vertex must be reachable from end through free vertices
        reach, frontier = 0, nb[end] & free
        while frontier:
            reach |= frontier
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= nb[low.bit_length() - 1]
                f ^= low
            frontier = nxt & free & ~reach
        return reach == free

    def extend(visited, end):
        if visited == full:
            return bool(nb[end] & 1)
        key = (visited, end)
        if key in failed:
            return False
        cand = nb[end] & ~visited
        while cand:
            low = cand & -cand
            w = low.bit_length() - 1
            nv = visited | low
            if (nv == full or feasible(nv, w)) and extend(nv, w):
                return True
            cand ^= low
        failed.add(key)
        return False

    return extend(1, 0)


# --- generators ------------------------------------------------------------------

def _connected(A) -> bool:
    v = len(A)
    seen = np.zeros(v, dtype=bool)
    seen[0] = True
    frontier = seen.copy()
    while frontier.any():
        nxt = (A[frontier].sum(axis=0) > 0) & ~seen
        seen |= nxt
        frontier = nxt
    return bool(seen.all())


def gen_connected_graph(v: int, edge_prob: float, seed: int, rng=None) -> Graph:
    """Erdos-Renyi G(v, p) conditioned on connectivity by rejection."""
    if v < 4 or v > HAMILTON_MAX_V:
        raise GraphError(f"v must lie in [4, {HAMILTON_MAX_V}], got {v}")
    if not 0.0 < edge_prob < 1.0:
        raise GraphError(f"edge_prob must lie in (0, 1), got {edge_prob}")
    rng = rng if rng is not None else make_rng(seed, "connected_graph", v)
    iu = np.triu_indices(v, 1)
    for _ in range(10_000):
        A = np.zeros((v, v), dtype=np.uint8)
        A[iu] = rng.random(len(iu[0])) < edge_prob
        A = A | A.T
        if _connected(A):
            return Graph(A)
    raise GraphError(f"10^4 consecutive disconnected draws at v={v}, p={edge_prob}; raise edge_prob")


def random_tree(v: int, rng) -> Graph:
    """Uniform labelled tree from a random Pruefer sequence."""
    if v == 1:
        return Graph(np.zeros((1, 1), dtype=np.uint8))
    if v == 2:
        return Graph.from_edges(2, [(0, 1)])
    seq = rng.integers(0, v, size=v - 2).tolist()
    degree = [1] * v
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = next(i for i in range(v) if degree[i] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, w = [i for i in range(v) if degree[i] == 1]
    edges.append((u, w))
    return Graph.from_edges(v, edges)


def tree_plus(v: int, k: int, rng) -> Graph:
    """A random tree with k extra random non-edges switched on."""
    A = random_tree(v, rng).adjacency.copy()
    iu = np.triu_indices(v, 1)
    free = np.flatnonzero(A[iu] == 0)
    pick = rng.choice(free, size=min(k, len(free)), replace=False)
    A[iu[0][pick], iu[1][pick]] = 1
    A[iu[1][pick], iu[0][pick]] = 1
    return Graph(A)


def eulerize(g: Graph, rng) -> Graph:
    """Make every degree even while keeping the graph connected.

    Odd-degree vertices are paired up.  For a pair (a, b) the edge ab is
    added if absent; otherwise a path a-c-b of two absent edges is added
    (c's degree grows by two); failing both, ab is deleted when that keeps
    the graph connected.
    """
    A = g.adjacency.copy()
    v = g.v
    while True:
        odd = np.flatnonzero(A.sum(axis=1) % 2 == 1)
        if len(odd) == 0:
            return Graph(A)
        pairs = [(int(a), int(b)) for i, a in enumerate(odd) for b in odd[i + 1:]]
        for k in rng.permutation(len(pairs)):
            a, b = pairs[k]
            if A[a, b] == 0:
                A[a, b] = A[b, a] = 1
                break
            cs = [c for c in range(v) if c not in (a, b) and A[a, c] == 0 and A[c, b] == 0]
            if cs:
                c = cs[int(rng.integers(len(cs)))]
                A[a, c] = A[c, a] = A[c, b] = A[b, c] = 1
                break
            B = A.copy()
            B[a, b] = B[b, a] = 0
            if _connected(B):
                A = B
                break
        else:
            raise GraphError("no parity-fixing move keeps the graph connected")


def hamiltonian_plus(v: int, k: int, rng) -> Graph:
    """A random Hamiltonian cycle plus k random chords."""
    order = rng.permutation(v)
    A = np.zeros((v, v), dtype=np.uint8)
    for i in range(v):
        a, b = order[i], order[(i + 1) % v]
        A[a, b] = A[b, a] = 1
    iu = np.triu_indices(v, 1)
    free = np.flatnonzero(A[iu] == 0)
    pick = rng.choice(free, size=min(k, len(free)), replace=False)
    A[iu[0][pick], iu[1][pick]] = 1
    A[iu[1][pick], iu[0][pick]] = 1
    return Graph(A)


def stacked_triangulation(v: int, rng) -> Graph:
    """Random maximal planar graph (3v - 6 edges) by repeated insertion into a face."""
    if v < 3:
        raise GraphError("need at least 3 vertices")
    A = np.zeros((v, v), dtype=np.uint8)
    for a, b in ((0, 1), (1, 2), (0, 2)):
        A[a, b] = A[b, a] = 1
    faces = [(0, 1, 2), (0, 1, 2)]          # inner and outer face
    for x in range(3, v):
        a, b, c = faces.pop(int(rng.integers(len(faces))))
        for y in (a, b, c):
            A[x, y] = A[y, x] = 1
        faces += [(a, b, x), (b, c, x), (a, c, x)]
    return Graph(A)


def thin_to(g: Graph, m: int, rng) -> Graph:
    """Delete random edges, skipping bridges, until m edges remain."""
    A = g.adjacency.copy()
    edges = g.edges
    e = len(edges)
    if m < g.v - 1:
        raise GraphError("a connected graph needs at least v - 1 edges")
    for k in rng.permutation(e):
        if e <= m:
            break
        a, b = edges[k]
        A[a, b] = A[b, a] = 0
        if _connected(A):
            e -= 1
        else:
            A[a, b] = A[b, a] = 1
    return Graph(A)


def planted_nonplanar(v: int, m: int, rng) -> Graph:
    """K5 or K3,3 on random vertices, the rest hung on as leaves or edge
    subdivisions, then random extra edges up to m edges in total."""
    use_k5 = v >= 5 and m >= v + 5 and rng.random() < 0.5
    if v < 6 and not use_k5:
        raise GraphError("K3,3 needs 6 vertices")
    order = rng.permutation(v).tolist()
    if use_k5:
        core = order[:5]
        edges = {(min(a, b), max(a, b)) for i, a in enumerate(core) for b in core[i + 1:]}
    else:
        core = order[:6]
        edges = {(min(a, b), max(a, b)) for a in core[:3] for b in core[3:]}
    placed = list(core)
    for x in order[len(core):]:
        if rng.random() < 0.5:
            a, b = sorted(edges)[int(rng.integers(len(edges)))]
            edges.discard((a, b))
            edges |= {(min(a, x), max(a, x)), (min(b, x), max(b, x))}
        else:
            y = placed[int(rng.integers(len(placed)))]
            edges.add((min(x, y), max(x, y)))
        placed.append(x)
    A = np.zeros((v, v), dtype=np.uint8)
    for a, b in edges:
        A[a, b] = A[b, a] = 1
    iu = np.triu_indices(v, 1)
    free = np.flatnonzero(A[iu] == 0)
    extra = max(0, m - len(edges))
    pick = rng.choice(free, size=min(extra, len(free)), replace=False)
    A[iu[0][pick], iu[1][pick]] = 1
    A[iu[1][pick], iu[0][pick]] = 1
    return Graph(A)


PROPERTIES = {
    "acyclic": (2, {"0": "has a cycle", "1": "acyclic"}),
    "girth3way": (3, {"0": "girth 3", "1": "girth 4", "2": "girth > 4 (incl. acyclic)"}),
    "planar": (2, {"0": "non-planar", "1": "planar"}),
    "euler": (2, {"0": "no Euler cycle", "1": "Euler cycle"}),
    "hamilton": (2, {"0": "no Hamilton cycle", "1": "Hamilton cycle"}),
}


def property_label(g: Graph, prop: str) -> int:
    if prop == "acyclic":
        return int(is_acyclic(g))
    if prop == "girth3way":
        cls = girth(g)[1]
        return {"3": 0, "4": 1}.get(cls, 2)
    if prop == "planar":
        return int(is_planar(g))
    if prop == "euler":
        return int(is_eulerian(g))
    if prop == "hamilton":
        return int(has_hamiltonian_cycle(g))
    raise GraphError(f"unknown property {prop!r}")


def _sampler(prop: str, target: int, v: int, rng) -> Graph:
    """One draw from the sampler mix aimed at class ``target``; the oracle decides the label."""
    sparse_k = int(rng.integers(1, max(2, v // 2) + 1))
    p = float(rng.uniform(0.15, 0.7))
    if prop == "acyclic":
        if target == 1:
            return random_tree(v, rng)
        return tree_plus(v, sparse_k, rng) if rng.random() < 0.25 else gen_connected_graph(v, p, 0, rng)
    if prop == "girth3way":
        if target == 0:
            return gen_connected_graph(v, p, 0, rng)
        return tree_plus(v, int(rng.integers(1, 4)), rng)
    if prop == "planar":
        # both classes share the edge-count range, so density alone does not decide
        m = int(rng.integers(v + 3, 3 * v - 6 + 1))
        if target == 1:
            return thin_to(stacked_triangulation(v, rng), m, rng)
        return planted_nonplanar(v, m, rng)
    if prop == "euler":
        while True:
            g = gen_connected_graph(v, p, 0, rng) if rng.random() < 0.5 else tree_plus(v, sparse_k, rng)
            if target == 0:
                return g
            try:
                return eulerize(g, rng)
            except GraphError:
                continue
    if prop == "hamilton":
        if target == 1:
            return hamiltonian_plus(v, int(rng.integers(0, v)), rng)
        return gen_connected_graph(v, float(rng.uniform(0.1, 0.4)), 0, rng) if rng.random() < 0.5 \
            else tree_plus(v, sparse_k, rng)
    raise GraphError(f"unknown property {prop!r}")


def gen_graph_property_task(prop: str, count: int, v_range=(6, 14), seed: int = 0,
                            copies: int = 1, max_draws: int | None = None) -> LabeledDataset:
    """Balanced adjacency-matrix dataset for one graph property.

    ``count`` base graphs are collected, count // n_classes per class, by
    drawing from per-class samplers (trees, near-trees, Erdos-Renyi draws at
    random densities, eulerized graphs, Hamiltonian cycles with chords)
    with the vertex count uniform in ``v_range``.  Each graph is randomly
    relabelled and labelled by the exact oracle, so a draw that lands in
    another class than intended simply goes to that class if it still has
    room.  Matrices are padded to the largest vertex count and ``copies``
    simultaneous row/column permutations of each are appended.
    """
    if prop not in PROPERTIES:
        raise GraphError(f"unknown property {prop!r} (known: {', '.join(PROPERTIES)})")
    lo, hi = int(v_range[0]), int(v_range[1])
    if not 4 <= lo <= hi <= HAMILTON_MAX_V:
        raise GraphError(f"v_range must satisfy 4 <= lo <= hi <= {HAMILTON_MAX_V}")
    n_classes, names = PROPERTIES[prop]
    per_class = count // n_classes
    if per_class < 1:
        raise GraphError("count too small for the number of classes")
    rng = make_rng(seed, "graph_task", prop)
    buckets = [[] for _ in range(n_classes)]
    draws = 0
    max_draws = max_draws or 200 * count
    while min(len(b) for b in buckets) < per_class:
        if draws >= max_draws:
            have = [len(b) for b in buckets]
            raise GraphError(f"could not fill classes for {prop} in {max_draws} draws: {have}")
        target = min(range(n_classes), key=lambda c: (len(buckets[c]), c))
        v = int(rng.integers(lo, hi + 1))
        g = _sampler(prop, target, v, rng).relabel(rng.permutation(v))
        draws += 1
        label = property_label(g, prop)
        if len(buckets[label]) < per_class:
            buckets[label].append(g)
    graphs = [g for b in buckets for g in b]
    y = np.repeat(np.arange(n_classes), per_class)
    order = rng.permutation(len(graphs))
    graphs = [graphs[i] for i in order]
    y = y[order]
    mats = pad_matrices([g.adjacency for g in graphs], hi, hi, dtype=np.uint8)
    ds = LabeledDataset(mats.reshape(len(graphs), -1), y, n_classes, f"graph-{prop}", (hi, hi),
                        meta={"feature_kind": "binary", "labels": names, "v_range": [lo, hi],
                              "draws": draws, "copies": copies, "corpus": "random samplers"})
    if copies > 0:
        blocks = [(g.v, g.v) for g in graphs]
        ds = augment_permutations(ds, "simultaneous", copies, derive_seed(seed, "graph_augment"),
                                  block_shapes=blocks)
    return ds


# --- edge-list dump ----------------------------------------------------------------

def write_edge_list(g: Graph, path) -> None:
    lines = [f"# v={g.v}"] + [f"{a} {b}" for a, b in g.edges]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_edge_list(path) -> Graph:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("# v="):
        raise GraphError("line 1: expected header '# v=N'")
    try:
        v = int(lines[0][4:])
    except ValueError:
        raise GraphError("line 1: bad vertex count") from None
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'u v'")
        a, b = int(parts[0]), int(parts[1])
        if not (0 <= a < v and 0 <= b < v) or a == b:
            raise GraphError(f"line {lineno}: bad edge {a} {b}")
        edges.append((a, b))
    return Graph.from_edges(v, edges)
