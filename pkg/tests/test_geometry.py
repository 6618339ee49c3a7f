import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlmath.dataset import DatasetError
from mlmath.gen.geometry import (CICY_COLS, CICY_ROWS, ConfigurationMatrix, GeneratorError,
                                 euler_characteristic, gen_cicy_hodge_task, gen_parity_functions,
                                 gen_quadratic_multiplicity, gen_quadratic_real_roots, load_cicy,
                                 parse_cicy_line, quadratic_multiplicity, real_root_count,
                                 repeated_root_triples)

SAMPLE = resources.files("mlmath") / "data" / "cicy_sample.txt"


# --- quadratics -----------------------------------------------------------------

@pytest.mark.parametrize("abc,r", [((1, 2, 1), 1), ((1, 0, 1), 2), ((1j, 2, -1j), 1), ((2, 2j, 1), 2)])
def test_multiplicity_examples(abc, r):
    assert quadratic_multiplicity(*abc) == r


@pytest.mark.parametrize("abc,r", [((1, 0, 1), 0), ((1, -2, 1), 1), ((1, 0, -1), 2)])
def test_real_root_examples(abc, r):
    assert real_root_count(*abc) == r


def test_zero_leading_coefficient():
    with pytest.raises(ValueError):
        quadratic_multiplicity(0, 1, 1)


def test_repeated_root_enumeration_is_complete():
    # brute force over the whole box at bound 3 with exact complex arithmetic
    B = 3
    r = range(-B, B + 1)
    g = [complex(x, y) for x in r for y in r]
    brute = sorted((int(a.real), int(a.imag), int(b.real), int(b.imag), int(c.real), int(c.imag))
                   for a in g if a for b in g for c in g if b * b == 4 * a * c)
    assert [tuple(t) for t in repeated_root_triples(B).tolist()] == brute


def test_quadratic_task_labels_and_balance():
    ds = gen_quadratic_multiplicity(200_000, 10, seed=1)
    counts = ds.class_counts()
    assert counts[0] == counts[1]
    assert 2000 < counts[0] < 4000                     # "around 3000 each"
    for row, label in zip(ds.X[:2000], ds.y[:2000]):
        a, b, c = complex(row[0], row[1]), complex(row[2], row[3]), complex(row[4], row[5])
        assert a != 0
        assert label == quadratic_multiplicity(a, b, c) - 1
    assert len(np.unique(ds.X, axis=0)) == len(ds)


def test_quadratic_sample_mode_finds_few_double_roots():
    with pytest.raises(GeneratorError, match="empty class"):
        gen_quadratic_multiplicity(50, 10, seed=0, rare_class="sample")


def test_real_roots_task():
    ds = gen_quadratic_real_roots(20_000, 10, seed=0)
    assert len(set(ds.class_counts().tolist())) == 1
    for (a, b, c), label in zip(ds.X.tolist(), ds.y.tolist()):
        assert a != 0 and label == real_root_count(a, b, c)


def test_quadratic_generators_are_deterministic():
    a, b = gen_quadratic_multiplicity(5000, 4, 3), gen_quadratic_multiplicity(5000, 4, 3)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)


# --- parity -----------------------------------------------------------------------

def test_parity_task():
    ds = gen_parity_functions(1001, seed=2)
    X = ds.X
    assert np.allclose(X[:, 2], -X[:, 0])
    even = ds.y == 1
    assert np.array_equal(X[even, 3], X[even, 1]) and np.array_equal(X[~even, 3], -X[~even, 1])
    assert np.all(np.abs(X[:, 1]) >= 1e-6)
    assert (X[:, 0] >= 0).all() and (X[:, 0] <= math.pi).all() and (np.abs(X[:, 1]) <= 1).all()
    assert abs(int(even.sum()) - 500) <= 1


# --- CICY -------------------------------------------------------------------------

def test_sample_loads_and_satisfies_invariants():
    cfgs = load_cicy(SAMPLE)
    assert len(cfgs) >= 26
    for c in cfgs:
        assert c.K == sum(c.ambient_dims) - 3
        assert c.degrees.sum(axis=1).tolist() == [n + 1 for n in c.ambient_dims]
        assert 1 <= c.h11 <= 19 and c.m <= CICY_ROWS and c.K <= CICY_COLS
        # Euler number 2 (h11 - h21)
        assert euler_characteristic(c) == 2 * (c.h11 - c.h21)


def test_quintic_and_schoen_records():
    q = parse_cicy_line("1 1 | 4 | 5 | 1 101")
    assert q.is_valid() and euler_characteristic(q) == -200
    s = parse_cicy_line("3 2 | 1 2 2 | 1 1 ; 3 0 ; 0 3 | 19 19")
    assert s.is_valid() and s.h11 == 19 and euler_characteristic(s) == 0


# Euler numbers of classic threefolds, as tabulated in the literature
CLASSIC = [
    ("1 1 | 4 | 5", -200),
    ("1 2 | 5 | 2 4", -176),
    ("1 2 | 5 | 3 3", -144),
    ("1 3 | 6 | 2 2 3", -144),
    ("1 4 | 7 | 2 2 2 2", -128),
    ("2 1 | 2 2 | 3 ; 3", -162),
    ("3 3 | 2 2 2 | 1 1 1 ; 1 1 1 ; 1 1 1", -90),
    ("4 1 | 1 1 1 1 | 2 ; 2 ; 2 ; 2", -128),
    ("2 3 | 3 3 | 3 0 1 ; 0 3 1", -18),
]


@pytest.mark.parametrize("line,chi", CLASSIC)
def test_euler_characteristic_classic(line, chi):
    assert euler_characteristic(parse_cicy_line(line)) == chi


def _euler_newton(cfg):
    """Independent route through Newton's identities.

    With c1 = 0 the power sums give c3 = (sum (n_r + 1) H_r^3 - sum D_j^3) / 3;
    chi is the coefficient of prod H_r^n_r in c3 * prod D_j.
    """
    sp = pytest.importorskip("sympy")
    H = sp.symbols(f"h0:{cfg.m}")
    D = [sum(int(cfg.degrees[r, j]) * H[r] for r in range(cfg.m)) for j in range(cfg.K)]
    c3 = (sum((n + 1) * h ** 3 for h, n in zip(H, cfg.ambient_dims)) - sum(d ** 3 for d in D)) / sp.Integer(3)
    top = sp.Poly(c3, *H)
    for d in D:
        top = top * sp.Poly(d, *H)
    return int(top.coeff_monomial(sp.Mul(*[h ** n for h, n in zip(H, cfg.ambient_dims)])))


def test_euler_characteristic_matches_newton_oracle():
    for c in load_cicy(SAMPLE):
        assert euler_characteristic(c) == _euler_newton(c)


@pytest.mark.parametrize("line,msg", [
    ("1 1 | 4 | 4 | 1 101", "row 0"),
    ("1 1 | 5 | 6", "K=1"),
    ("2 1 | 1 3 | 2", "degree rows"),
    ("1 1 | 4 | 5 | 1", "h11 h21"),
])
def test_invalid_records(tmp_path, line, msg):
    p = tmp_path / "c.txt"
    p.write_text("# header\n1 1 | 4 | 5 | 1 101\n\n" + line + "\n")
    with pytest.raises(GeneratorError, match="record 2 \\(line 4\\)") as e:
        load_cicy(p)
    assert msg in str(e.value)


def test_hodge_task_padding_and_labels():
    cfgs = load_cicy(SAMPLE)
    ds = gen_cicy_hodge_task(cfgs, copies=3, seed=0)
    assert ds.shape == (12, 15) and len(ds) == 4 * len(cfgs)
    assert ds.label_arity == 19
    schoen = [i for i, c in enumerate(cfgs) if c.h11 == 19][0]
    nine = [i for i, c in enumerate(cfgs) if c.m == 9][0]
    assert ds.y[schoen] == 18 and ds.y[nine] == 8
    M = ds.matrices()
    for k in range(len(ds)):
        c = cfgs[k % len(cfgs)]
        m = M[k]
        assert not m[c.m:, :].any() and not m[:, c.K:].any()
        block = m[:c.m, :c.K]
        # a row/column permutation of the source: same multiset of row sums and of columns
        assert sorted(block.sum(axis=1)) == sorted(c.degrees.sum(axis=1))
        assert sorted(map(tuple, block.T.tolist())) != [] and \
            sorted(sorted(col) for col in block.T.tolist()) == sorted(sorted(col) for col in c.degrees.T.tolist())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_permuted_configurations_stay_valid(seed):
    rng = np.random.default_rng(seed)
    cfgs = load_cicy(SAMPLE)
    c = cfgs[int(rng.integers(len(cfgs)))]
    p = c.permuted(rng.permutation(c.m), rng.permutation(c.K))
    assert p.is_valid()
    assert euler_characteristic(p) == euler_characteristic(c)


def test_hodge_task_rejects_unlabelled():
    with pytest.raises(GeneratorError):
        gen_cicy_hodge_task([parse_cicy_line("1 1 | 4 | 5")], 1, 0)
