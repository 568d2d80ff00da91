import math

import numpy as np
import pytest

from ordembed import edm

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_points(n, d, rng, scale=None):
    scale = math.sqrt(1 / (2 * d)) if scale is None else scale
    return edm.center_embedding(rng.normal(scale=scale, size=(n, d)))


def random_gram(n, d, rng):
    return edm.gram_from_embedding(random_points(n, d, rng))


def random_hollow(n, rng):
    A = rng.normal(size=(n, n))
    A = A + A.T
    np.fill_diagonal(A, 0.0)
    return A


@pytest.fixture
def rng():
    return np.random.default_rng(20160912)
