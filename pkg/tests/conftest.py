from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def fraction_rank(A) -> int:
    """Plain Gauss-Jordan over Fractions; an oracle independent of the package."""
    M = [[Fraction(v) for v in row] for row in A]
    if not M:
        return 0
    rows, cols = len(M), len(M[0])
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c] / M[r][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
        if r == rows:
            break
    return r


def brute_depth(q, X, w, directions=100_000, seed=0):
    """Min over sampled unit directions of the closed half-space mass through q."""
    rng = np.random.default_rng(seed)
    d = X.shape[1]
    U = rng.standard_normal((directions, d))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    S = (X - q) @ U.T
    mass = (w[:, None] * (S >= -1e-12)).sum(axis=0)
    return float(mass.min())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
