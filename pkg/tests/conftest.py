import math

import numpy as np
import pytest

from symflow.catalog import get_entry
from symflow.scalar_matrix import MatrixK

SPACES = ["sp1_u1", "grassmann_c11", "sp2_u2"]


def qmul(a, b):
    """Hamilton product of two (w, x, y, z) quaternions, written out by hand."""
    a1, b1, c1, d1 = a
    a2, b2, c2, d2 = b
    return np.array([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ])


def qmatmul(A, B):
    """Product of (n, n, 4) quaternion component arrays, entry by entry."""
    n = A.shape[0]
    out = np.zeros((n, n, 4))
    for i in range(n):
        for k in range(n):
            for j in range(n):
                out[i, k] += qmul(A[i, j], B[j, k])
    return out


def q(w=0.0, x=0.0, y=0.0, z=0.0):
    return MatrixK.quaternion(w, x, y, z)


R2 = 1 / math.sqrt(2)
R3 = 1 / math.sqrt(3)


@pytest.fixture(params=SPACES)
def entry(request):
    return get_entry(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
