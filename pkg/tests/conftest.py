import os
from pathlib import Path

import numpy as np
import pytest

from pnn.dataio import Split, Dataset, TRAIN_IMAGES

REPO = Path(__file__).resolve().parents[1]

# criterion lines collected by test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def find_mnist() -> Path | None:
    candidates = [os.environ.get("PNN_MNIST_DIR"), REPO / "data" / "mnist"]
    for c in candidates:
        if c and any((Path(c) / (TRAIN_IMAGES + ext)).exists() for ext in ("", ".gz")):
            return Path(c)
    return None


@pytest.fixture(scope="session")
def mnist_dir():
    d = find_mnist()
    if d is None:
        pytest.skip("MNIST IDX files not found (set PNN_MNIST_DIR or populate data/mnist)")
    return d


def make_toy(n_train=60, n_eval=40, n_in=6, n_out=3, seed=0) -> Dataset:
    """Linearly separable-ish toy data: class = argmax of a fixed projection."""
    gen = np.random.default_rng(seed)
    proj = gen.normal(size=(n_out, n_in))
    x = gen.uniform(size=(n_train + n_eval, n_in))
    y = np.argmax(x @ proj.T, axis=1)
    return Dataset(Split(x[:n_train], y[:n_train]), Split(x[n_train:], y[n_train:]))


@pytest.fixture
def toy():
    return make_toy()
