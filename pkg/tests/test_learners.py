import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlmath.dataset import Example, LabeledDataset, split_train_val
from mlmath.learners import (DEFAULTS, KINDS, LearnerError, LearnerSpec, fit, load_model, predict,
                             predict_batch, save_model)
from mlmath.learners.mlp import (MlpArchitecture, forward, init_params, loss_and_grads,
                                 mlp_gradient_check, softmax)
from mlmath.learners.svm import SvmModel
from mlmath.metrics import accuracy_pair, confusion_matrix

FAST = {
    "mlp": {"layers": (8,), "epochs": 30},
    "svm": {},
    "naive_bayes": {},
    "logistic": {},
    "decision_tree": {},
    "random_forest": {"n_trees": 15},
    "knn": {"k": 3},
}


def blobs(n=60, seed=0, gap=4.0, d=2):
    rng = np.random.default_rng(seed)
    X = np.concatenate([rng.normal(0, 1, (n, d)), rng.normal(gap, 1, (n, d))])
    y = np.repeat([0, 1], n)
    return LabeledDataset(X, y, 2, "blobs", meta={"feature_kind": "real"})


def three_blobs(n=40, seed=1):
    rng = np.random.default_rng(seed)
    centres = np.array([[0, 0], [6, 0], [0, 6]])
    X = np.concatenate([rng.normal(c, 0.8, (n, 2)) for c in centres])
    return LabeledDataset(X, np.repeat([0, 1, 2], n), 3, "three", meta={"feature_kind": "real"})


# --- spec validation --------------------------------------------------------------

@pytest.mark.parametrize("kind,params,msg", [
    ("knn", {"k": 0}, "knn.k"),
    ("mlp", {"layers": ()}, "mlp.layers"),
    ("svm", {"gamma": -1.0}, "svm.gamma"),
    ("svm", {"kernel": "poly"}, "svm.kernel"),
    ("decision_tree", {"max_depth": 0}, "max_depth"),
    ("svm", {"bogus": 1}, "bogus"),
    ("cnn", {}, "unknown learner"),
])
def test_spec_validation(kind, params, msg):
    with pytest.raises(LearnerError, match=msg):
        LearnerSpec(kind, params)


def test_spec_defaults_are_documented_values():
    assert DEFAULTS["mlp"]["lr"] == 0.01 and DEFAULTS["mlp"]["batch_size"] == 32
    assert DEFAULTS["mlp"]["epochs"] == 50
    assert DEFAULTS["random_forest"]["n_trees"] == 100
    assert DEFAULTS["decision_tree"]["max_depth"] == 20
    assert DEFAULTS["logistic"]["l2"] == 1e-4 and DEFAULTS["logistic"]["epochs"] == 200
    assert LearnerSpec("svm").hyperparameters["C"] == 1.0


# --- contract shared by every learner --------------------------------------------------

@pytest.mark.parametrize("kind", sorted(KINDS))
def test_every_learner_separates_blobs(kind):
    ds = blobs()
    sp = split_train_val(ds, 0.8, 0)
    model = fit(LearnerSpec(kind, FAST[kind], seed=3), sp.train)
    pred = predict_batch(model, sp.validation)
    assert accuracy_pair(confusion_matrix(sp.validation.y, pred, 2)).precision >= 0.95


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_every_learner_handles_three_classes(kind):
    ds = three_blobs()
    model = fit(LearnerSpec(kind, FAST[kind]), ds)
    pred = predict_batch(model, ds)
    assert set(pred.tolist()) <= {0, 1, 2}
    # naive Bayes binarises real features at the median, which blurs three blobs
    assert (pred == ds.y).mean() >= (0.75 if kind == "naive_bayes" else 0.9)


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_fit_is_deterministic(kind):
    ds = blobs(gap=1.0)
    probe = np.random.default_rng(5).normal(0.5, 2, (50, 2))
    a = predict_batch(fit(LearnerSpec(kind, FAST[kind], seed=11), ds), probe)
    b = predict_batch(fit(LearnerSpec(kind, FAST[kind], seed=11), ds), probe)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_batch_matches_pointwise_and_repeats(kind):
    ds = blobs(n=20, gap=1.5)
    model = fit(LearnerSpec(kind, FAST[kind]), ds)
    Z = np.vstack([ds.X[:7], ds.X[:1], ds.X[:1]])
    batch = predict_batch(model, Z)
    assert batch.tolist() == [predict(model, z) for z in Z]
    assert batch[-1] == batch[-2] == batch[0]
    assert predict_batch(model, np.zeros((0, 2))).tolist() == []


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_wrong_dimension_is_rejected(kind):
    model = fit(LearnerSpec(kind, FAST[kind]), blobs(n=10))
    with pytest.raises(LearnerError):
        predict(model, [1.0, 2.0, 3.0])


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_constant_label_training_set(kind):
    ds = LabeledDataset(np.random.default_rng(0).normal(size=(12, 3)), np.ones(12, dtype=int), 2)
    model = fit(LearnerSpec(kind, {} if kind == "mlp" else FAST[kind]), ds)
    assert set(predict_batch(model, np.random.default_rng(1).normal(size=(9, 3))).tolist()) == {1}


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_save_load_round_trip(tmp_path, kind):
    ds = three_blobs(n=15)
    model = fit(LearnerSpec(kind, FAST[kind], seed=2), ds)
    save_model(model, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json")
    probe = np.random.default_rng(4).normal(2, 4, (40, 2))
    assert np.array_equal(predict_batch(model, probe), predict_batch(back, probe))


def test_empty_training_set():
    with pytest.raises(LearnerError):
        fit(LearnerSpec("knn"), LabeledDataset(np.zeros((0, 2)), np.zeros(0, dtype=int), 2))


# --- kNN ------------------------------------------------------------------------------

def test_knn1_memorises():
    rng = np.random.default_rng(0)
    X = rng.integers(0, 2, (40, 16))
    X = np.unique(X, axis=0)
    y = rng.integers(0, 3, len(X))
    ds = LabeledDataset(X, y, 3)
    assert np.array_equal(predict_batch(fit(LearnerSpec("knn", {"k": 1}), ds), ds), y)


def test_knn_vote_tie_goes_to_lower_label():
    ds = LabeledDataset(np.array([[-1.0], [1.0]]), [1, 0], 2)
    assert predict(fit(LearnerSpec("knn", {"k": 2}), ds), [0.0]) == 0
    ds = LabeledDataset(np.array([[1.0], [-1.0]]), [1, 0], 2)
    assert predict(fit(LearnerSpec("knn", {"k": 2}), ds), [0.0]) == 0


def test_knn_distance_tie_goes_to_lower_index():
    # k=1 at equal distance: the earlier training example wins
    ds = LabeledDataset(np.array([[0, 1], [1, 0]]), [1, 0], 2)
    assert predict(fit(LearnerSpec("knn", {"k": 1}), ds), [0, 0]) == 1


def test_knn_defaults_hamming_50_on_binary():
    X = np.random.default_rng(0).integers(0, 2, (80, 10))
    model = fit(LearnerSpec("knn"), LabeledDataset(X, np.arange(80) % 2, 2))
    assert (model.impl.k, model.impl.metric) == (50, "hamming")
    assert np.all(np.diag(model.impl.distances(X[:5])[:, :5]) == 0)
    brute = np.abs(X[:5, None, :] - X[None, :, :]).sum(axis=2)
    assert np.array_equal(model.impl.distances(X[:5]), brute)


# --- SVM ----------------------------------------------------------------------------

def test_svm_hard_separable_and_label_swap():
    ds = blobs(n=30, gap=6.0)
    hp = {"C": 1000.0}
    m = fit(LearnerSpec("svm", hp), ds)
    assert np.array_equal(predict_batch(m, ds), ds.y)
    swapped = fit(LearnerSpec("svm", hp), ds.replace(y=1 - ds.y))
    probe = np.random.default_rng(3).normal(3, 3, (30, 2))
    f1 = m.impl.decision_function(m.transform(probe))[:, 0]
    f2 = swapped.impl.decision_function(swapped.transform(probe))[:, 0]
    # equal up to the solver tolerance
    assert np.allclose(f1, -f2, atol=1e-2)
    assert np.array_equal(np.sign(f1[np.abs(f1) > 0.05]), -np.sign(f2[np.abs(f1) > 0.05]))


@pytest.mark.parametrize("kernel", ["rbf", "linear"])
def test_svm_agrees_with_reference_solver(kernel):
    """Same dual problem solved by an independent solver (libsvm through scikit-learn)."""
    svc = pytest.importorskip("sklearn.svm").SVC
    ds = blobs(n=80, gap=1.5, seed=4)
    X = (ds.X - ds.X.mean(0)) / ds.X.std(0)
    gamma = 0.5
    ours = SvmModel.fit(X, ds.y, 2, {**DEFAULTS["svm"], "kernel": kernel, "gamma": gamma, "tol": 1e-5}, 0)
    ref = svc(C=1.0, kernel=kernel, gamma=gamma, tol=1e-7).fit(X, ds.y)
    probe = np.random.default_rng(0).normal(0, 1.5, (200, 2))
    f_ours = ours.decision_function(probe)[:, 0]
    f_ref = ref.decision_function(probe)
    assert np.max(np.abs(f_ours - f_ref)) < 1e-2


# --- trees, forest, bayes ---------------------------------------------------------------

def test_unlimited_tree_fits_consistent_data():
    rng = np.random.default_rng(0)
    X = np.unique(rng.integers(0, 20, (300, 4)), axis=0)
    y = rng.integers(0, 3, len(X))
    ds = LabeledDataset(X, y, 3)
    m = fit(LearnerSpec("decision_tree", {"max_depth": 1000}), ds)
    assert np.array_equal(predict_batch(m, ds), y)


def test_tree_learns_xor():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]] * 5)
    y = X[:, 0] ^ X[:, 1]
    m = fit(LearnerSpec("decision_tree"), LabeledDataset(X, y, 2))
    assert np.array_equal(predict_batch(m, X), y)


def test_naive_bayes_unseen_values_are_finite():
    X = np.array([[0, 1], [1, 2], [2, 0], [0, 0]])
    m = fit(LearnerSpec("naive_bayes"), LabeledDataset(X, [0, 1, 1, 0], 2))
    lp = m.impl.log_posterior(m.transform(np.array([[7, 9], [0, 5]])))
    assert np.isfinite(lp).all()


# --- MLP numerics -----------------------------------------------------------------------

def random_architecture(rng):
    depth = int(rng.integers(1, 4))
    widths = tuple(int(w) for w in rng.integers(1, 7, depth))
    acts = tuple(rng.choice(["sigmoid", "relu"]) for _ in range(depth))
    return MlpArchitecture(widths, acts, int(rng.integers(2, 5)))


def test_gradient_check_ten_random_architectures():
    rng = np.random.default_rng(20240612)
    worst = 0.0
    for trial in range(10):
        arch = random_architecture(rng)
        d = int(rng.integers(1, 6))
        x = rng.normal(0, 1, d)
        err = mlp_gradient_check(arch, Example(x, int(rng.integers(0, arch.n_classes))), 1e-5, seed=trial)
        worst = max(worst, err)
    assert worst < 1e-4


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_gradient_check_property(seed):
    rng = np.random.default_rng(seed)
    arch = random_architecture(rng)
    x = rng.normal(0, 1, int(rng.integers(1, 5)))
    assert mlp_gradient_check(arch, (x, 0), seed=seed) < 1e-4


@pytest.mark.parametrize("eps", [0.0, 1e-2])
def test_gradient_check_epsilon_range(eps):
    with pytest.raises(ValueError):
        mlp_gradient_check(MlpArchitecture((2,)), ([1.0], 0), eps)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_gradient_check_non_finite_loss():
    arch = MlpArchitecture((2,), "relu")
    with pytest.raises(ValueError, match="non-finite"):
        mlp_gradient_check(arch, ([np.inf], 0))


def test_zero_net_gives_uniform_softmax():
    arch = MlpArchitecture((4, 3), "sigmoid", n_classes=3)
    params = [(np.zeros_like(W), np.zeros_like(b)) for W, b in init_params(arch, 5, 0)]
    probs, _ = forward(arch, params, np.zeros((1, 5)))
    assert np.allclose(probs, 1 / 3)


def test_linear_layer_gradient_is_logistic_gradient():
    rng = np.random.default_rng(1)
    X, y = rng.normal(size=(7, 4)), rng.integers(0, 3, 7)
    W, b = rng.normal(size=(4, 3)), rng.normal(size=3)
    arch = MlpArchitecture((), "relu", 3)
    _, [(gW, gb)] = loss_and_grads(arch, [(W, b)], X, y)
    P = softmax(X @ W + b)
    Y = np.eye(3)[y]
    assert np.allclose(gW, X.T @ (P - Y) / 7, atol=1e-14)
    assert np.allclose(gb, (P - Y).mean(axis=0), atol=1e-14)


def test_mlp_argmax_contract():
    ds = three_blobs(n=20)
    m = fit(LearnerSpec("mlp", {"layers": (6,), "epochs": 20}), ds)
    probs = m.impl.predict_proba(m.transform(ds.X))
    assert np.array_equal(predict_batch(m, ds), probs.argmax(axis=1))
