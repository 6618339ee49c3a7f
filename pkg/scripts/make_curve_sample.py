"""Build the shipped 200-curve label sample (needs ``pip install cypari``).

Curves y^2 = x^3 + a x + b are drawn from four families so that several
torsion orders occur: random coefficients, a rational 2-torsion point,
full 2-torsion, and b a square (a 3-torsion point when a = 0).  Labels:

* torsion: PARI ``elltors``;
* rank: PARI ``ellrank``, kept only when its lower and upper bounds agree;
* integer_points: for rank 0 the affine points are exactly the non-trivial
  torsion points, which are integral, so the label is ``torsion > 1``; for
  positive rank an integral x with |x| <= 2000 is searched for and curves
  without a hit are dropped (the answer would be unknown).
"""
from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
from cypari import pari

TARGET = 200


def integral_point(a, b, bound=2000):
    for x in range(-bound, bound + 1):
        f = x ** 3 + a * x + b
        if f >= 0 and math.isqrt(f) ** 2 == f:
            return True
    return False


def candidates(rng):
    while True:
        fam = rng.integers(4)
        if fam == 0:
            a, b = (int(v) for v in rng.integers(-50, 51, 2))
        elif fam == 1:
            a, r = int(rng.integers(-30, 31)), int(rng.integers(-8, 9))
            b = -r ** 3 - a * r
        elif fam == 2:
            r1, r2 = (int(v) for v in rng.integers(-8, 9, 2))
            r3 = -r1 - r2
            a, b = r1 * r2 + r1 * r3 + r2 * r3, -r1 * r2 * r3
        else:
            a, b = int(rng.integers(-3, 4)) * int(rng.integers(0, 2)), int(rng.integers(1, 15)) ** 2
        yield a, b


def label(a, b):
    E = pari.ellinit([a, b])
    tors = int(pari.elltors(E)[0])
    r = pari.ellrank(E)
    lo, hi = int(r[0]), int(r[1])
    if lo != hi:
        return None
    if lo == 0:
        ip = int(tors > 1)
    elif integral_point(a, b):
        ip = 1
    else:
        return None
    return lo, tors, ip


def main(out):
    rng = np.random.default_rng(20240101)
    rows, seen = [], set()
    for a, b in candidates(rng):
        if (a, b) in seen or 4 * a ** 3 + 27 * b ** 2 == 0:
            continue
        seen.add((a, b))
        lab = label(a, b)
        if lab is None:
            continue
        rows.append((a, b) + lab)
        if len(rows) == TARGET:
            break
    text = "a,b,rank,torsion,integer_points\n" + "".join(",".join(map(str, r)) + "\n" for r in rows)
    Path(out).write_text(text, encoding="utf-8")
    print(f"wrote {len(rows)} curves to {out}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/mlmath/data/curves_sample.csv")
