"""Soft-margin kernel SVM trained by SMO.

The dual is solved with the second-order working-set selection of
Fan, Chen & Lin (the LIBSVM scheme).  Kernel rows are computed on demand;
when the full Gram matrix fits the cache budget it is built once with BLAS,
otherwise rows live in an LRU cache.  Multiclass problems are one-vs-rest
with the largest decision value winning (ties to the lower label).
"""
from __future__ import annotations

from collections import OrderedDict

import numpy as np

TAU = 1e-12


class KernelRows:
    def __init__(self, X, kind: str, gamma: float, cache_mb: float):
        self.X = X
        self.kind = kind
        self.gamma = gamma
        self.sq = np.einsum("ij,ij->i", X, X)
        n = len(X)
        self.full = None
        self.cache = OrderedDict()
        self.max_rows = max(2, int(cache_mb * 2**20 / (8 * max(n, 1))))
        if n <= self.max_rows:
            self.full = self._block(X, self.sq)

    def _block(self, Z, zsq):
        G = Z @ self.X.T
        if self.kind == "linear":
            return G
        D = zsq[:, None] + self.sq[None, :] - 2.0 * G
        np.maximum(D, 0.0, out=D)
        return np.exp(-self.gamma * D, out=D)

    def diag(self):
        if self.kind == "linear":
            return self.sq.copy()
        return np.ones(len(self.X))

    def row(self, i: int):
        if self.full is not None:
            return self.full[i]
        r = self.cache.get(i)
        if r is not None:
            self.cache.move_to_end(i)
            return r
        r = self._block(self.X[i:i + 1], self.sq[i:i + 1])[0]
        self.cache[i] = r
        if len(self.cache) > self.max_rows:
            self.cache.popitem(last=False)
        return r


def smo(rows: KernelRows, y, C: float, tol: float, max_iter: int):
    """Solve the binary dual for labels ``y`` in {-1, +1}; returns (alpha, rho, iterations)."""
    n = len(y)
    yf = y.astype(np.float64)
    alpha = np.zeros(n)
    G = -np.ones(n)
    Kd = rows.diag()
    pos = y > 0
    it = 0
    while it < max_iter:
        it += 1
        yG = -yf * G
        at_lo = alpha <= 0.0
        at_hi = alpha >= C
        up = np.where(pos, ~at_hi, ~at_lo)
        low = np.where(pos, ~at_lo, ~at_hi)
        cand = np.where(up, yG, -np.inf)
        i = int(np.argmax(cand))
        gmax = cand[i]
        gmin = np.min(np.where(low, yG, np.inf))
        if gmax - gmin < tol:
            break
        Ki = rows.row(i)
        b = gmax - yG
        a = Kd[i] + Kd - 2.0 * Ki
        a = np.where(a > 0, a, TAU)
        obj = np.where(low & (b > 0), -(b * b) / a, np.inf)
        j = int(np.argmin(obj))
        Kj = rows.row(j)
        ai, aj = alpha[i], alpha[j]
        yi, yj = yf[i], yf[j]
        Qij = yi * yj * Ki[j]
        if yi != yj:
            quad = max(Kd[i] + Kd[j] + 2.0 * Qij, TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = max(Kd[i] + Kd[j] - 2.0 * Qij, TAU)
            delta = (G[i] - G[j]) / quad
            s = ai + aj
            ai -= delta
            aj += delta
            if s > C:
                if ai > C:
                    ai, aj = C, s - C
            elif aj < 0:
                aj, ai = 0.0, s
            if s > C:
                if aj > C:
                    aj, ai = C, s - C
            elif ai < 0:
                ai, aj = 0.0, s
        dai, daj = ai - alpha[i], aj - alpha[j]
        alpha[i], alpha[j] = ai, aj
        G += yf * (yi * dai * Ki + yj * daj * Kj)
    # threshold, as in LIBSVM: average over free vectors, else midpoint of the bounds
    yG = yf * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yG[free].mean())
    else:
        at_hi = alpha >= C
        ub_mask = np.where(pos, ~at_hi, at_hi)
        lb_mask = ~ub_mask
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        rho = float((ub + lb) / 2) if np.isfinite(ub) and np.isfinite(lb) else 0.0
    return alpha, rho, it


def resolve_gamma(gamma, X) -> float:
    if gamma == "scale":
        v = float(X.var()) if X.size else 0.0
        return 1.0 / (X.shape[1] * v) if v > 0 else 1.0
    if gamma == "auto":
        return 1.0 / X.shape[1]
    return float(gamma)


class SvmModel:
    def __init__(self, kernel, gamma, sv, coef, rho, n_classes):
        self.kernel = kernel
        self.gamma = gamma
        self.sv = sv        # support vectors (union over the one-vs-rest problems)
        self.coef = coef    # (n_problems, n_sv) = alpha * y
        self.rho = rho      # (n_problems,)
        self.n_classes = n_classes

    @classmethod
    def fit(cls, X, y, n_classes, hp, seed):
        X = np.asarray(X, dtype=np.float64)
        gamma = resolve_gamma(hp["gamma"], X)
        rows = KernelRows(X, hp["kernel"], gamma, hp["cache_mb"])
        problems = [1] if n_classes == 2 else range(n_classes)
        coefs, rhos = [], []
        for c in problems:
            yy = np.where(y == c, 1, -1)
            if np.all(yy == yy[0]):
                # one-sided problem: constant decision value of that sign
                alpha, rho = np.zeros(len(yy)), -float(yy[0])
            else:
                alpha, rho, _ = smo(rows, yy, hp["C"], hp["tol"], hp["max_iter"])
            coefs.append(alpha * yy)
            rhos.append(rho)
        coef = np.array(coefs)
        used = np.flatnonzero(np.any(coef != 0, axis=0))
        return cls(hp["kernel"], gamma, X[used], coef[:, used], np.array(rhos), n_classes)

    def decision_function(self, X, chunk: int = 2048):
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((len(X), len(self.rho)))
        svsq = np.einsum("ij,ij->i", self.sv, self.sv)
        for s in range(0, len(X), chunk):
            Z = X[s:s + chunk]
            Kb = Z @ self.sv.T
            if self.kernel == "rbf":
                D = np.einsum("ij,ij->i", Z, Z)[:, None] + svsq[None, :] - 2.0 * Kb
                Kb = np.exp(-self.gamma * np.maximum(D, 0.0))
            out[s:s + chunk] = Kb @ self.coef.T - self.rho
        return out

    def predict(self, X):
        f = self.decision_function(X)
        if self.n_classes == 2:
            return (f[:, 0] > 0).astype(np.int64)
        return np.argmax(f, axis=1)

    def state(self) -> dict:
        return {"kernel": self.kernel, "gamma": self.gamma, "sv": self.sv.tolist(),
                "coef": self.coef.tolist(), "rho": self.rho.tolist(), "n_classes": self.n_classes}

    @classmethod
    def from_state(cls, s):
        coef = np.array(s["coef"], dtype=np.float64)
        sv = np.array(s["sv"], dtype=np.float64).reshape(coef.shape[1], -1)
        return cls(s["kernel"], s["gamma"], sv, coef.reshape(len(s["rho"]), -1),
                   np.array(s["rho"], dtype=np.float64), s["n_classes"])
