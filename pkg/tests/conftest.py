import numpy as np
import pytest

from mlmath.dataset import LabeledDataset


def make_ds(counts, d=3, seed=0, shape=(), task="toy"):
    """Random integer features with the given number of examples per class."""
    rng = np.random.default_rng(seed)
    y = np.concatenate([np.full(c, k) for k, c in enumerate(counts)]).astype(np.int64)
    X = rng.integers(-50, 50, size=(len(y), d if not shape else int(np.prod(shape))))
    return LabeledDataset(X, y, len(counts), task, shape)


@pytest.fixture
def toy():
    return make_ds([30, 20])


# criterion number -> (status, detail), filled in by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"{status:<5} criterion {k:>2}: {detail}")
