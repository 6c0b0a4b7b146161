import itertools

import numpy as np
import pytest

from tradenet.network import WeightedNetwork, build_network

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, passed, detail)``."""
    def record(number, passed, detail):
        _ACCEPTANCE.append((number, bool(passed), detail))
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def triangle():
    return build_network(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)])


def star(n_leaves, weight=1.0):
    return build_network(n_leaves + 1, [(0, i, weight) for i in range(1, n_leaves + 1)])


def complete(n, weight=1.0):
    return build_network(n, [(i, j, weight) for i, j in itertools.combinations(range(n), 2)])


def random_network(n, p, rng, weights=None):
    a = np.triu(rng.random((n, n)) < p, 1)
    u, v = np.nonzero(a)
    w = rng.lognormal(0.0, 1.0, u.size) if weights is None else weights(u, v)
    return WeightedNetwork(n, u, v, w)
