import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from symflow.errors import FieldMismatch, SingularMatrix
from symflow.group import random_group_element, random_matrix
from symflow.scalar_matrix import (
    MatrixK,
    complex_adjoint,
    conj_transpose,
    from_complex_adjoint,
    mat_analytic,
    mat_inverse,
    matrix_from_json,
    matrix_to_json,
    re_trace_inner,
    to_real,
)

from conftest import q, qmatmul, qmul

FIELDS = ["R", "C", "H"]
seeds = st.integers(0, 2**32 - 1)


def test_quaternion_units_multiply_like_hamilton():
    i, j, k = q(x=1), q(y=1), q(z=1)
    minus_one = -MatrixK.identity("H", 1)
    for u in (i, j, k):
        assert (u @ u - minus_one).norm() < 1e-15
    assert (i @ j @ k - minus_one).norm() < 1e-15
    assert (i @ j - k).norm() < 1e-15
    assert (j @ i + k).norm() < 1e-15


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_quaternion_matrix_product_matches_entrywise_hamilton(seed):
    rng = np.random.default_rng(seed)
    A = random_matrix(3, "H", rng)
    B = random_matrix(3, "H", rng)
    expected = qmatmul(A.components(), B.components())
    assert np.allclose((A @ B).components(), expected, atol=1e-12)


def test_conj_transpose_examples():
    assert (conj_transpose(MatrixK.identity("H", 2)) - MatrixK.identity("H", 2)).norm() == 0
    assert np.allclose(conj_transpose(q(x=1)).components().ravel(), [0, -1, 0, 0])
    rng = np.random.default_rng(0)
    for f in FIELDS:
        A = random_matrix(3, f, rng)
        assert np.array_equal(A.H.H.a, A.a)


@pytest.mark.parametrize("f", FIELDS)
def test_conj_transpose_reverses_products(f, rng):
    A, B = random_matrix(3, f, rng), random_matrix(3, f, rng)
    assert ((A @ B).H - B.H @ A.H).norm() < 1e-12


def test_quaternion_conjugation_reverses_products(rng):
    for _ in range(20):
        a, b = rng.standard_normal(4), rng.standard_normal(4)
        conj = np.array([1, -1, -1, -1])
        assert np.allclose(qmul(a, b) * conj, qmul(b * conj, a * conj))


def test_re_trace_inner_examples(rng):
    assert re_trace_inner(MatrixK.identity("C", 3), MatrixK.identity("C", 3)) == pytest.approx(3)
    assert re_trace_inner(q(x=1), q(x=1)) == pytest.approx(1)
    for f in FIELDS:
        X = random_matrix(3, f, rng)
        # sum of squared real components
        assert re_trace_inner(X, X) == pytest.approx(float(np.sum(to_real(X) ** 2)))
        Y = random_matrix(3, f, rng)
        assert re_trace_inner(X, Y) == pytest.approx(re_trace_inner(Y, X))


def test_re_trace_inner_is_half_the_adjoint_inner_product(rng):
    X, Y = random_matrix(2, "H", rng), random_matrix(2, "H", rng)
    cx, cy = complex_adjoint(X), complex_adjoint(Y)
    assert re_trace_inner(X, Y) == pytest.approx(0.5 * re_trace_inner(cx, cy))


@pytest.mark.parametrize("f", FIELDS)
def test_trace_is_cyclic_in_real_part(f, rng):
    A, B = random_matrix(3, f, rng), random_matrix(3, f, rng)
    assert (A @ B).re_trace() == pytest.approx((B @ A).re_trace())


@pytest.mark.parametrize("f", FIELDS)
def test_associativity(f, rng):
    A, B, C = (random_matrix(4, f, rng) for _ in range(3))
    lhs, rhs = (A @ B) @ C, A @ (B @ C)
    assert (lhs - rhs).norm() <= 1e-12 * lhs.norm()


def test_re_trace_inner_rejects_mismatch():
    with pytest.raises(FieldMismatch):
        re_trace_inner(MatrixK.identity("R", 2), MatrixK.identity("C", 2))


def test_inverse_examples(rng):
    I = MatrixK.identity("H", 2)
    assert (mat_inverse(I) - I).norm() == 0
    assert np.allclose(mat_inverse(q(y=1)).components().ravel(), [0, 0, -1, 0])
    for f in FIELDS:
        U = random_group_element(3, f, rng)
        assert (mat_inverse(U) - U.H).norm() < 1e-10


@pytest.mark.parametrize("f", FIELDS)
def test_inverse_round_trip(f, rng):
    A = random_matrix(4, f, rng)
    assert np.linalg.cond(A.a) < 1e6
    Ai = mat_inverse(A)
    I = MatrixK.identity(f, 4)
    assert (A @ Ai - I).norm() < 1e-10
    assert (Ai @ A - I).norm() < 1e-10


def test_inverse_singular():
    with pytest.raises(SingularMatrix):
        mat_inverse(MatrixK.from_real_diag("C", [1.0, 0.0]))


def test_exponential_examples():
    Z = MatrixK.zeros("H", 2)
    assert (mat_analytic(Z, "exp") - MatrixK.identity("H", 2)).norm() == 0
    theta = 0.7
    e = mat_analytic(theta * q(x=1), "exp")
    assert np.allclose(e.components().ravel(), [math.cos(theta), math.sin(theta), 0, 0], atol=1e-15)


@pytest.mark.parametrize("f", FIELDS)
def test_exponential_matches_scipy(f, rng):
    A = 2.0 * random_matrix(4, f, rng)
    ours = mat_analytic(A, "exp")
    ref = scipy.linalg.expm(A.a)
    assert np.linalg.norm(ours.a - ref) <= 1e-12 * np.linalg.norm(ref)


@pytest.mark.parametrize("f", FIELDS)
def test_hyperbolic_identities(f, rng):
    A = random_matrix(3, f, rng)
    s, c, e = (mat_analytic(A, k) for k in ("sinh", "cosh", "exp"))
    I = MatrixK.identity(f, 3)
    assert (c @ c - s @ s - I).norm() < 1e-10
    assert (c + s - e).norm() < 1e-10 * e.norm()


def test_complex_adjoint_examples(rng):
    assert np.array_equal(complex_adjoint(MatrixK.identity("H", 3)).a, np.eye(6))
    cj = complex_adjoint(q(y=1)).a
    assert np.allclose(cj @ cj, -np.eye(2))
    with pytest.raises(FieldMismatch):
        complex_adjoint(MatrixK.identity("C", 2))


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_complex_adjoint_is_a_star_homomorphism(seed):
    rng = np.random.default_rng(seed)
    A, B = random_matrix(3, "H", rng), random_matrix(3, "H", rng)
    assert np.linalg.norm(complex_adjoint(A @ B).a - complex_adjoint(A).a @ complex_adjoint(B).a) < 1e-12
    assert np.linalg.norm(complex_adjoint(A.H).a - complex_adjoint(A).a.conj().T) < 1e-15
    assert (from_complex_adjoint(complex_adjoint(A)) - A).norm() < 1e-15


def test_adjoint_singular_values_come_in_pairs(rng):
    A = random_matrix(3, "H", rng)
    s = np.sort(np.linalg.svd(complex_adjoint(A).a, compute_uv=False))
    assert np.allclose(s[0::2], s[1::2])


@pytest.mark.parametrize("f", FIELDS)
def test_json_round_trip(f, rng):
    A = random_matrix(3, f, rng)
    B = matrix_from_json(matrix_to_json(A))
    assert B.field == f and (A - B).norm() == 0


def test_json_entry_format():
    obj = matrix_to_json(MatrixK.diag("H", [[1, 0, 1, 0], [0, 1, 1, 0]]))
    assert obj["field"] == "H" and obj["n"] == 2
    assert obj["rows"][0][0] == [1.0, 0.0, 1.0, 0.0]
    c = matrix_to_json(MatrixK("C", np.array([[1 + 2j]])))
    assert c["rows"] == [[[1.0, 2.0]]]
    with pytest.raises(ValueError):
        matrix_from_json({"field": "R", "n": 2, "rows": [[1.0]]})
