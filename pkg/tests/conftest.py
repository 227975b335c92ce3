import sys

import numpy as np
import pytest

from lcqw.linalg import random_hermitian

Z = np.array([[1, 0], [0, -1]], dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)


def signed_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    """Hermitian draw with a nonnegative diagonal and a mix of negative-real,
    positive-real and complex off-diagonal entries."""
    h = random_hermitian(n, rng)
    for j in range(n):
        h[j, j] = abs(h[j, j])
        for k in range(j + 1, n):
            kind = rng.integers(3)
            if kind == 0:
                h[j, k] = -abs(h[j, k])
            elif kind == 1:
                h[j, k] = abs(h[j, k])
            h[k, j] = np.conj(h[j, k])
    return h


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
