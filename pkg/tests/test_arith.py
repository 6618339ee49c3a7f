import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlmath.gen.arith import (ArithError, EllipticCurve, WindowSpec, ap_trace, digits, gen_ap_vectors,
                              gen_curve_task, gen_liouville_task, gen_modp_fixed_task,
                              gen_modp_variable_task, gen_prime_window_task, good_primes,
                              liouville, load_curve_labels, omega_table, prime_sieve, window_features)

import oracles as O

SAMPLE = resources.files("mlmath") / "data" / "curves_sample.csv"
FIRST_100_PRIMES = [p for p in range(2, 542) if O.is_prime_trial(p)]


# --- primes and Liouville --------------------------------------------------------------

@pytest.mark.parametrize("limit,count", [(10, 4), (100, 25), (1000, 168), (10 ** 6, 78498)])
def test_prime_counts(limit, count):
    t = prime_sieve(limit)
    assert len(t.primes) == count == O.segmented_prime_count(limit)


def test_sieve_matches_trial_division():
    t = prime_sieve(5000)
    ns = np.arange(5001)
    assert t.delta(ns).tolist() == [int(O.is_prime_trial(int(n))) for n in ns]
    with pytest.raises(ArithError):
        t.delta(5001)
    with pytest.raises(ArithError):
        prime_sieve(2)


@pytest.mark.parametrize("limit,total", [(1000, -14), (10_000, -94)])
def test_liouville_summatory(limit, total):
    om = omega_table(limit)
    lam = np.where(om[1:] % 2 == 0, 1, -1)
    assert int(lam.sum()) == total
    assert sum(liouville(n) for n in range(1, limit + 1)) == total


def test_liouville_matches_brute():
    t = prime_sieve(1000)
    for n in range(1, 3000):
        assert liouville(n) == liouville(n, t) == O.liouville_brute(n)
    with pytest.raises(ArithError):
        liouville(0)


@given(st.integers(1, 10 ** 6), st.integers(1, 10 ** 6))
def test_liouville_completely_multiplicative(a, b):
    assert liouville(a * b) == liouville(a) * liouville(b)


# --- windows ---------------------------------------------------------------------------

def test_window_layout():
    spec = WindowSpec(w=3, k=5, i_max=4)
    values = np.arange(100)
    X, y = window_features(values, spec)
    assert X.shape == (4, 4)
    assert X[0].tolist() == [1, 2, 3, 4]
    assert y.tolist() == [9, 10, 11, 12]


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 12), st.integers(1, 40), st.integers(30, 60))
def test_prime_window_reconstructs_from_odd_numbers(w, k, i_max):
    spec = WindowSpec(w, k, i_max)
    ds = gen_prime_window_task(spec, per_class=None)
    for row, label in zip(ds.X, ds.y):
        # locate i from the row: the window and target are the primality of odd numbers
        matches = [i for i in range(1, i_max + 1)
                   if [int(O.is_prime_trial(2 * (i + j) + 1)) for j in range(w + 1)] == row.tolist()
                   and int(O.is_prime_trial(2 * (i + w + k) + 1)) == label]
        assert matches


def test_prime_window_task_balanced():
    ds = gen_prime_window_task(WindowSpec(100, 10_000, 50_000), seed=0, per_class=9000)
    assert ds.class_counts().tolist() == [9000, 9000]
    assert ds.X.shape[1] == 101 and set(np.unique(ds.X)) <= {0, 1}


def test_liouville_task_values():
    spec = WindowSpec(5, 7, 200)
    ds = gen_liouville_task(spec, per_class=None)
    X, y = window_features(np.array([O.liouville_brute(n) for n in range(1, 2 * 220 + 3, 2)]) > 0, spec)
    rows = {tuple(r) + (t,) for r, t in zip(X.astype(int).tolist(), y.astype(int).tolist())}
    for r, t in zip(ds.X.tolist(), ds.y.tolist()):
        assert tuple(r) + (t,) in rows
    assert ds.class_counts()[0] == ds.class_counts()[1]


def test_window_spec_validation():
    with pytest.raises(ArithError):
        WindowSpec(w=0)
    with pytest.raises(ArithError, match="does not cover"):
        gen_prime_window_task(WindowSpec(10, 10, 100), table=prime_sieve(50))


# --- n mod p -----------------------------------------------------------------------------

@given(st.integers(0, 10 ** 9), st.integers(2, 16))
def test_digits_round_trip(n, base):
    d = digits(n, base, 40)
    assert sum(x * base ** i for i, x in enumerate(reversed(d))) == n
    assert all(0 <= x < base for x in d)


def test_digits_overflow():
    with pytest.raises(ArithError):
        digits(16, 2, 4)


@pytest.mark.parametrize("p,base", [(2, 2), (3, 2), (7, 10)])
def test_modp_fixed(p, base):
    ds = gen_modp_fixed_task(p, (0, 1000), base=base)
    counts = ds.class_counts()
    assert ds.label_arity == p and len(set(counts.tolist())) == 1
    powers = base ** np.arange(ds.X.shape[1] - 1, -1, -1)
    n = ds.X @ powers
    assert np.array_equal(n % p, ds.y)
    assert len(np.unique(n)) == len(n)


def test_modp_variable():
    ds = gen_modp_variable_task([3, 5, 7, 11], (0, 4096), per_p=200)
    wn, wp = 12, 4
    n = ds.X[:, :wn] @ (2 ** np.arange(wn - 1, -1, -1))
    p = ds.X[:, wn:] @ (2 ** np.arange(wp - 1, -1, -1))
    assert ds.X.shape[1] == wn + wp
    assert np.array_equal((n % p == 0).astype(int), ds.y)
    for q in (3, 5, 7, 11):
        assert ds.y[p == q].sum() == 100 and (p == q).sum() == 200
    with pytest.raises(ArithError):
        gen_modp_variable_task([3])


# --- elliptic curves -----------------------------------------------------------------

def _random_curves(n, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        c = EllipticCurve(int(rng.integers(-200, 201)), int(rng.integers(-200, 201)))
        if not c.is_singular():
            out.append(c)
    return out


def test_ap_matches_point_counting():
    """100 random curves, every prime of good reduction up to 50."""
    checked = 0
    for c in _random_curves(100, 0):
        for p in FIRST_100_PRIMES:
            if p > 50:
                break
            if not c.has_good_reduction(p):
                continue
            assert ap_trace(c, p) == p + 1 - O.count_points_naive(c.a, c.b, p), (c, p)
            checked += 1
    assert checked > 1200


def test_hasse_bound_on_first_hundred_primes():
    curves = _random_curves(100, 1)
    V = gen_ap_vectors(curves, 100)
    for c, row in zip(curves, V):
        ps = good_primes(c, 100)
        assert len(ps) == 100 and 2 not in ps
        assert all(a * a <= 4 * p for a, p in zip(row.tolist(), ps))


def test_bad_reduction_rejected():
    c = EllipticCurve(-1, 0)            # disc -16 * (-4): bad at 2 only
    assert not c.has_good_reduction(2)
    with pytest.raises(ArithError):
        ap_trace(EllipticCurve(0, 5), 5)   # y^2 = x^3 at p = 5
    with pytest.raises(ArithError, match="singular"):
        gen_ap_vectors([EllipticCurve(-3, 2)], 5)


def test_shipped_curve_sample():
    curves = load_curve_labels(SAMPLE)
    assert len(curves) == 200
    for c in curves:
        assert c.torsion == O.torsion_order_nagell_lutz(c.a, c.b), c


@pytest.mark.parametrize("prop", ["rank", "torsion", "integer_points"])
def test_curve_task_trains_end_to_end(prop):
    from mlmath.learners import LearnerSpec, fit, predict_batch
    from mlmath.dataset import split_train_val
    ds = gen_curve_task(load_curve_labels(SAMPLE), prop, N=30, seed=0, min_class=5)
    assert ds.X.shape[1] == 30 and len(set(ds.class_counts().tolist())) == 1
    s = split_train_val(ds, 0.8, seed=0)
    train, test = s.train, s.validation
    model = fit(LearnerSpec("naive_bayes", {}, 0), train)
    pred = predict_batch(model, test.X)
    assert pred.shape == test.y.shape and set(pred.tolist()) <= set(range(ds.label_arity))


@pytest.mark.parametrize("body,msg", [
    ("a,b\n", "line 1"),
    ("a,b,rank,torsion,integer_points\n1,2,0,1\n", "line 2"),
    ("a,b,rank,torsion,integer_points\n1,2,0,1,0\nx,2,0,1,0\n", "line 3"),
    ("a,b,rank,torsion,integer_points\n-3,2,0,1,0\n", "singular"),
    ("a,b,rank,torsion,integer_points\n1,2,0,0,0\n", "out of range"),
])
def test_curve_file_errors(tmp_path, body, msg):
    f = tmp_path / "c.csv"
    f.write_text(body)
    with pytest.raises(ArithError, match=msg):
        load_curve_labels(f)


def test_curve_task_unknown_property():
    with pytest.raises(ArithError):
        gen_curve_task(load_curve_labels(SAMPLE), "conductor")


@pytest.mark.parametrize("hi,base,width", [(2 ** 16, 2, 16), (1000, 10, 3), (1001, 10, 4), (2, 2, 1)])
def test_modp_digit_width(hi, base, width):
    assert gen_modp_fixed_task(2, (0, hi), base=base).X.shape[1] == width
