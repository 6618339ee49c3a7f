"""Left-right planarity test (Brandes' formulation of de Fraysseix-Rosenstiehl).

Only the decision phase is implemented; no embedding is produced.  Phase 1
orients the graph by DFS and computes lowpoints and nesting depths; phase 2
runs a second DFS that maintains a stack of conflict pairs of return-edge
intervals and fails as soon as some interval would have to sit on both
sides.
"""
from __future__ import annotations

import sys


class _Interval:
    __slots__ = ("low", "high")

    def __init__(self, low=None, high=None):
        self.low = low
        self.high = high

    def empty(self):
        return self.low is None and self.high is None

    def copy(self):
        return _Interval(self.low, self.high)


class _Pair:
    __slots__ = ("L", "R")

    def __init__(self, L=None, R=None):
        self.L = L if L is not None else _Interval()
        self.R = R if R is not None else _Interval()

    def swap(self):
        self.L, self.R = self.R, self.L


class _LRTester:
    def __init__(self, n, adj):
        self.n = n
        self.adj = adj
        self.height = [None] * n
        self.parent_edge = [None] * n
        self.lowpt = {}
        self.lowpt2 = {}
        self.nesting = {}
        self.out = [[] for _ in range(n)]
        self.visited_edges = set()
        self.S = []
        self.stack_bottom = {}
        self.lowpt_edge = {}
        self.ref = {}

    # phase 1 ---------------------------------------------------------------
    def orient(self, v):
        e = self.parent_edge[v]
        for w in self.adj[v]:
            if (v, w) in self.visited_edges or (w, v) in self.visited_edges:
                continue
            vw = (v, w)
            self.visited_edges.add(vw)
            self.out[v].append(vw)
            self.lowpt[vw] = self.height[v]
            self.lowpt2[vw] = self.height[v]
            if self.height[w] is None:          # tree edge
                self.parent_edge[w] = vw
                self.height[w] = self.height[v] + 1
                self.orient(w)
            else:                               # back edge
                self.lowpt[vw] = self.height[w]
            self.nesting[vw] = 2 * self.lowpt[vw]
            if self.lowpt2[vw] < self.height[v]:   # chordal
                self.nesting[vw] += 1
            if e is not None:
                if self.lowpt[vw] < self.lowpt[e]:
                    self.lowpt2[e] = min(self.lowpt[e], self.lowpt2[vw])
                    self.lowpt[e] = self.lowpt[vw]
                elif self.lowpt[vw] > self.lowpt[e]:
                    self.lowpt2[e] = min(self.lowpt2[e], self.lowpt[vw])
                else:
                    self.lowpt2[e] = min(self.lowpt2[e], self.lowpt2[vw])

    # phase 2 ---------------------------------------------------------------
    def _top(self):
        return self.S[-1] if self.S else None

    def _conflicting(self, I, b):
        return not I.empty() and self.lowpt[I.high] > self.lowpt[b]

    def _lowest(self, P):
        if P.L.empty():
            return self.lowpt[P.R.low]
        if P.R.empty():
            return self.lowpt[P.L.low]
        return min(self.lowpt[P.L.low], self.lowpt[P.R.low])

    def _add_constraints(self, ei, e):
        P = _Pair()
        while True:
            Q = self.S.pop()
            if not Q.L.empty():
                Q.swap()
            if not Q.L.empty():
                return False
            if self.lowpt[Q.R.low] > self.lowpt[e]:
                if P.R.empty():
                    P.R.high = Q.R.high
                else:
                    self.ref[P.R.low] = Q.R.high
                P.R.low = Q.R.low
            else:
                self.ref[Q.R.low] = self.lowpt_edge[e]
            if self._top() is self.stack_bottom[ei]:
                break
        while self.S and (self._conflicting(self.S[-1].L, ei) or self._conflicting(self.S[-1].R, ei)):
            Q = self.S.pop()
            if self._conflicting(Q.R, ei):
                Q.swap()
            if self._conflicting(Q.R, ei):
                return False
            self.ref[P.R.low] = Q.R.high
            if Q.R.low is not None:
                P.R.low = Q.R.low
            if P.L.empty():
                P.L.high = Q.L.high
            else:
                self.ref[P.L.low] = Q.L.high
            P.L.low = Q.L.low
        if not (P.L.empty() and P.R.empty()):
            self.S.append(P)
        return True

    def _trim_back_edges(self, u):
        while self.S and self._lowest(self.S[-1]) == self.height[u]:
            self.S.pop()
        if self.S:
            P = self.S.pop()
            while P.L.high is not None and P.L.high[1] == u:
                P.L.high = self.ref.get(P.L.high)
            if P.L.high is None and P.L.low is not None:
                self.ref[P.L.low] = P.R.low
                P.L.low = None
            while P.R.high is not None and P.R.high[1] == u:
                P.R.high = self.ref.get(P.R.high)
            if P.R.high is None and P.R.low is not None:
                self.ref[P.R.low] = P.L.low
                P.R.low = None
            self.S.append(P)

    def test(self, v):
        e = self.parent_edge[v]
        ordered = sorted(self.out[v], key=lambda x: self.nesting[x])
        for ei in ordered:
            self.stack_bottom[ei] = self._top()
            w = ei[1]
            if ei == self.parent_edge[w]:
                if not self.test(w):
                    return False
            else:
                self.lowpt_edge[ei] = ei
                self.S.append(_Pair(R=_Interval(ei, ei)))
            if self.lowpt[ei] < self.height[v]:
                if ei is ordered[0]:
                    self.lowpt_edge[e] = self.lowpt_edge[ei]
                elif not self._add_constraints(ei, e):
                    return False
        if e is not None:
            u = e[0]
            self._trim_back_edges(u)
            if self.lowpt[e] < self.height[u] and self.S:
                hL, hR = self.S[-1].L.high, self.S[-1].R.high
                if hL is not None and (hR is None or self.lowpt[hL] > self.lowpt[hR]):
                    self.ref[e] = hL
                else:
                    self.ref[e] = hR
        return True


def lr_planar(n: int, edges) -> bool:
    """Planarity of the simple undirected graph on vertices 0..n-1."""
    edges = {(min(u, v), max(u, v)) for u, v in edges if u != v}
    if n >= 3 and len(edges) > 3 * n - 6:
        return False
    adj = [[] for _ in range(n)]
    for u, v in sorted(edges):
        adj[u].append(v)
        adj[v].append(u)
    t = _LRTester(n, adj)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * n + 100))
    try:
        roots = []
        for v in range(n):
            if t.height[v] is None:
                t.height[v] = 0
                roots.append(v)
                t.orient(v)
        return all(t.test(v) for v in roots)
    finally:
        sys.setrecursionlimit(old)
