"""Build the shipped CICY sample.

Every configuration here has all degrees >= 1, so each column is ample and
the Lefschetz hyperplane theorem gives h11 = m (the number of projective
factors).  h21 then follows from the Euler number: chi = 2 (h11 - h21).
Only 26 such configurations exist.  Three records with known, non-trivial
h11 are appended: the Schoen threefold (19, 19), the Tian-Yau manifold
(14, 23) and a nine-factor configuration with h11 = 9.
"""
from __future__ import annotations

import itertools
import sys
from pathlib import Path

import numpy as np

from mlmath.gen.geometry import ConfigurationMatrix, euler_characteristic

SCHOEN = ((1, 2, 2), [[1, 1], [3, 0], [0, 3]], 19)
TIAN_YAU = ((3, 3), [[3, 0, 1], [0, 3, 1]], 14)
NINE = ((1, 1, 1, 1, 2, 2, 2, 2, 2), [
    [1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0],
    [1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0],
    [0, 1, 0, 1, 0, 0, 0, 1, 0, 0, 0],
    [1, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0],
    [0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 1],
    [0, 0, 0, 0, 1, 0, 1, 0, 1, 0, 0],
    [0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 1],
], 9)


def compositions(total, parts, lo):
    if parts == 1:
        if total >= lo:
            yield (total,)
        return
    for x in range(lo, total - lo * (parts - 1) + 1):
        for rest in compositions(total - x, parts - 1, lo):
            yield (x,) + rest


def canonical(dims, q):
    """Smallest (dims, matrix) over all row and column orderings."""
    m, K = q.shape
    best = None
    for cp in itertools.permutations(range(K)):
        qc = q[:, cp]
        rows = sorted(zip(dims, map(tuple, qc)))
        key = tuple(rows)
        if best is None or key < best:
            best = key
    return best


def ample_configs():
    seen = set()
    for m in range(1, 5):
        for K in range(1, 6):
            total = K + 3
            for dims in itertools.combinations_with_replacement(range(1, 8), m):
                if sum(dims) != total:
                    continue
                lo = 2 if m == 1 else 1          # a lone linear equation is redundant
                row_choices = [list(compositions(n + 1, K, lo)) for n in dims]
                for rows in itertools.product(*row_choices):
                    q = np.array(rows)
                    if q.max() > 5:
                        continue
                    key = canonical(dims, q)
                    if key in seen:
                        continue
                    seen.add(key)
                    d = tuple(r[0] for r in key)
                    qq = np.array([r[1] for r in key])
                    yield d, qq


def main(out):
    lines = ["# m K | n_1..n_m | degree rows separated by ';' | h11 h21"]
    for dims, q in ample_configs():
        cfg = ConfigurationMatrix(dims, q)
        if not cfg.is_valid():
            continue
        chi = euler_characteristic(cfg)
        h11 = len(dims)
        h21 = h11 - chi // 2
        lines.append(ConfigurationMatrix(dims, q, h11, h21).to_line())
    for dims, q, h11 in (SCHOEN, TIAN_YAU, NINE):
        cfg = ConfigurationMatrix(dims, np.array(q))
        chi = euler_characteristic(cfg)
        lines.append(ConfigurationMatrix(dims, np.array(q), h11, h11 - chi // 2).to_line())
    Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines) - 1} records to {out}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/mlmath/data/cicy_sample.txt")
