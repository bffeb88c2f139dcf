import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symflow.catalog import get_entry
from symflow.decomposition import (
    adapted_polar,
    adapted_svd,
    critical_blocks_diagonal,
    decomposition_to_json,
    diagonal_blocks,
    diagonal_critical_points,
    global_max_polar_test,
    global_max_value,
    hermitian_min_eig,
    hermitian_square_root_structure,
    is_morse,
    polar,
    reduce_to_diagonal,
    reduction_to_json,
    svd_canonical,
)
from symflow.errors import HypothesisViolated, NotCritical, NotSquareRoot, StructureViolated
from symflow.group import is_in_group, random_group_element, random_matrix
from symflow.height import (
    critical_value_from_signs,
    grad_model,
    hessian_model,
    height,
    is_critical_group,
    is_critical_model,
    xhat,
)
from symflow.oracle import OracleConfig, oracle_critical_set
from symflow.scalar_matrix import MatrixK
from symflow.symmetric_space import Automorphism, apply_sigma, is_in_cartan_model, tangent_basis_model

from conftest import R2, R3, q

FIELDS = ["R", "C", "H"]
R2X = math.sqrt(2)
X63 = MatrixK.diag("H", [[1, 0, 1, 0], [0, 1, 1, 0]])
SIG63 = Automorphism(MatrixK.diag("H", [[0, 1, 0, 0], [0, 1, 0, 0]]))


def _sigma_compatible(sig, rng):
    Z = random_matrix(sig.n, sig.field, rng)
    return Z.H + apply_sigma(sig, Z)


# -- canonical SVD ------------------------------------------------------------


def test_svd_of_zero():
    svd = svd_canonical(MatrixK.zeros("H", 3))
    assert svd.block_sizes == (3,) and svd.values == ()
    assert svd.D.norm() == 0 and svd.residual == 0


def test_svd_first_function_has_a_double_value():
    svd = svd_canonical(X63)
    assert svd.block_sizes == (0, 2)
    assert svd.values == pytest.approx((R2X,))
    assert svd.residual < 1e-12


def test_svd_second_function_values():
    svd = svd_canonical(xhat(SIG63, X63).H)
    assert svd.block_sizes == (0, 1, 1)
    assert svd.values == pytest.approx((2.0, 2 * R2X))


@given(st.sampled_from(FIELDS), st.integers(1, 4), st.integers(0, 2**32 - 1), st.integers(0, 2))
@settings(max_examples=60, deadline=None)
def test_svd_invariants(f, n, seed, rank_drop):
    rng = np.random.default_rng(seed)
    U, V = random_group_element(n, f, rng), random_group_element(n, f, rng)
    vals = rng.uniform(0.2, 3.0, n)
    vals[: min(rank_drop, n)] = 0.0
    if n > 1 and seed % 2:
        vals[-1] = vals[-2]
    Y = U @ MatrixK.from_real_diag(f, vals) @ V.H
    svd = svd_canonical(Y)
    assert svd.residual < 1e-10 * max(1.0, Y.norm())
    assert is_in_group(svd.U, 1e-10)[0] and is_in_group(svd.V, 1e-10)[0]
    assert sum(svd.block_sizes) == n
    assert list(svd.values) == sorted(svd.values) and all(t > 0 for t in svd.values)
    n0, values, sizes = diagonal_blocks(svd.D)
    assert (n0, tuple(sizes)) == (svd.block_sizes[0], svd.block_sizes[1:])
    assert sorted(svd.singular_values) == pytest.approx(sorted(vals), abs=1e-9)


def test_quaternion_svd_gauge_is_deterministic(rng):
    Y = random_matrix(3, "H", rng)
    a, b = svd_canonical(Y), svd_canonical(Y)
    assert np.array_equal(a.U.a, b.U.a)
    for col in a.U.components().transpose(1, 0, 2):
        first = next(c for c in col if np.linalg.norm(c) > 1e-12)
        assert first[0] > 0 and np.allclose(first[1:], 0, atol=1e-12)


def test_diagonal_blocks_rejects_bad_order():
    with pytest.raises(ValueError):
        diagonal_blocks(MatrixK.from_real_diag("R", [2.0, 1.0]))
    with pytest.raises(ValueError):
        diagonal_blocks(MatrixK("R", np.array([[1.0, 1.0], [0.0, 1.0]])))


# -- polar forms --------------------------------------------------------------


@pytest.mark.parametrize("f", FIELDS)
def test_polar_examples(f, rng):
    U = random_group_element(3, f, rng)
    p = polar(U)
    assert (p.S - MatrixK.identity(f, 3)).norm() < 1e-10 and (p.Omega - U).norm() < 1e-10
    W = random_group_element(3, f, rng)
    S0 = W @ MatrixK.from_real_diag(f, [0.5, 1.0, 2.0]) @ W.H
    p = polar(S0)
    assert (p.S - S0).norm() < 1e-10 and (p.Omega - MatrixK.identity(f, 3)).norm() < 1e-10


@pytest.mark.parametrize("f", FIELDS)
@pytest.mark.parametrize("side", ["left", "right"])
def test_polar_random(f, side, rng):
    Y = random_matrix(4, f, rng)
    p = polar(Y, side)
    assert (p.reconstruct() - Y).norm() < 1e-10
    assert hermitian_min_eig(p.S) >= -1e-10
    assert is_in_group(p.Omega, 1e-10)[0]
    if side == "left":
        assert (p.S @ p.S - Y @ Y.H).norm() < 1e-10
    else:
        assert (p.S @ p.S - Y.H @ Y).norm() < 1e-10


def test_square_root_structure():
    D = MatrixK.from_real_diag("C", [1.0, 2.0, 3.0])
    W, Delta = hermitian_square_root_structure(D, D)
    assert (Delta - D).norm() < 1e-12 and (W @ Delta @ W.H - D).norm() < 1e-12
    W, Delta = hermitian_square_root_structure(-D, D)
    assert (Delta + D).norm() < 1e-12
    with pytest.raises(NotSquareRoot):
        hermitian_square_root_structure(2.0 * D, D)


def test_square_root_structure_at_group_critical_point(rng):
    # Y = U D V*, critical A = V E U* with E a sign pattern: Sigma = Y A = U D E U*
    U, V = random_group_element(3, "H", rng), random_group_element(3, "H", rng)
    D = MatrixK.from_real_diag("H", [1.0, 2.0, 3.0])
    Y = U @ D @ V.H
    for signs in itertools.product((1.0, -1.0), repeat=3):
        E = MatrixK.from_real_diag("H", signs)
        A = V @ E @ U.H
        assert is_critical_group(Y, A)[0]
        _, Delta = hermitian_square_root_structure(Y @ A, Y)
        d = np.real(np.diag(Delta.a))[:3]
        assert d == pytest.approx(np.array(signs) * [1, 2, 3], abs=1e-10)


def test_global_max_polar_test_examples():
    Y = q(0, 1, 1, 1)
    lo, hi = q(0, R3, R3, R3), q(0, -R3, -R3, -R3)
    assert global_max_polar_test(Y, hi)
    assert height(Y, hi) == pytest.approx(math.sqrt(3)) == global_max_value(Y)
    assert not global_max_polar_test(Y, lo)
    assert height(Y, lo) == pytest.approx(-math.sqrt(3))
    S = MatrixK.from_real_diag("C", [1.0, 2.0])
    assert global_max_polar_test(S, MatrixK.identity("C", 2))
    with pytest.raises(NotCritical):
        global_max_polar_test(Y, MatrixK.identity("H", 1))


# -- adapted decompositions ---------------------------------------------------


def _check_adapted(sig, Y, dec, tol=1e-8):
    r = dec.residuals
    for key in ("reconstruction", "sigma_Omega", "sigma_S", "Omega_unitary"):
        assert r[key] < tol * max(1.0, Y.norm()), key
    assert r["S_min_eig"] >= -1e-10
    assert (dec.S @ dec.S - Y @ Y.H).norm() < 1e-8 * max(1.0, Y.norm()) ** 2


def test_adapted_polar_invertible(entry, rng):
    sig = entry.spec.sigma
    for _ in range(10):
        Y = _sigma_compatible(sig, rng)
        dec = adapted_polar(sig, Y)
        _check_adapted(sig, Y, dec)
        assert dec.epsilons == []


def test_adapted_polar_singular(entry, rng):
    sig = entry.spec.sigma
    for _ in range(10):
        Y = _sigma_compatible(sig, rng)
        d = adapted_svd(sig, Y)
        vals = np.real(np.diag(d.svd.D.a))[: Y.n].copy()
        vals[0] = 0.0
        Ys = d.svd.U @ MatrixK.from_real_diag(Y.field, vals) @ d.svd.V.H
        dec = adapted_polar(sig, Ys)
        _check_adapted(sig, Ys, dec)
        assert dec.epsilons and dec.residuals["limit_gap"] < 1e-6


def test_adapted_polar_zero():
    sig = get_entry("sp2_u2").spec.sigma
    dec = adapted_polar(sig, MatrixK.zeros("H", 2))
    assert dec.S.norm() == 0
    assert (dec.Omega - MatrixK.identity("H", 2)).norm() < 1e-12


def test_adapted_polar_right_side(entry, rng):
    sig = entry.spec.sigma
    Y = _sigma_compatible(sig, rng)
    dec = adapted_polar(sig, Y, side="right")
    assert (dec.Omega @ dec.S - Y).norm() < 1e-10
    assert dec.residuals["sigma_S_right"] < 1e-10


def test_adapted_polar_hypotheses():
    sig = Automorphism(q(x=1))
    with pytest.raises(HypothesisViolated):
        adapted_polar(sig, q(0, 1, 0, 0))  # sigma(i) = i but i* = -i
    # sigma(D) = -D is not positive semidefinite
    neg = Automorphism(MatrixK("C", np.array([[0, 1], [1, 0]], dtype=complex)))
    Y = MatrixK.from_real_diag("C", [1.0, 2.0])
    with pytest.raises(HypothesisViolated):
        adapted_polar(neg, Y)


def test_adapted_svd_second_function():
    Yh = xhat(SIG63, X63).H
    d = adapted_svd(SIG63, Yh)
    assert d.svd.values == pytest.approx((2.0, 2 * R2X))
    assert d.residuals["sigma_Theta"] < 1e-8
    assert (d.svd.U @ d.svd.D @ d.svd.V.H - Yh).norm() < 1e-12
    assert (d.Theta - d.svd.U.H @ apply_sigma(SIG63, d.svd.V)).norm() < 1e-14


def test_reference_adapted_svd_has_swapped_entries():
    # reference factors U = diag(j, (1+j)/sqrt2), D = diag(2, 2sqrt2), V = I give
    # Theta = diag(-j, (1-j)/sqrt2) but reproduce diag(2j, 2 + 2j): our Xhat* with its
    # two diagonal entries swapped
    U = MatrixK.diag("H", [[0, 0, 1, 0], [R2, 0, R2, 0]])
    D = MatrixK.from_real_diag("H", [2.0, 2 * R2X])
    Theta = U.H @ apply_sigma(SIG63, MatrixK.identity("H", 2))
    assert np.allclose(Theta.components()[[0, 1], [0, 1]], [[0, 0, -1, 0], [R2, 0, -R2, 0]])
    assert (apply_sigma(SIG63, Theta) - Theta.H).norm() < 1e-15
    ref = (U @ D).components()[[0, 1], [0, 1]]
    ours = xhat(SIG63, X63).H.components()[[0, 1], [0, 1]]
    assert np.allclose(ref, ours[::-1])


def test_adapted_svd_identity_sigma(rng):
    sig = Automorphism(MatrixK.identity("C", 3))
    W = random_group_element(3, "C", rng)
    Y = W @ MatrixK.from_real_diag("C", [0.5, 1.0, 2.0]) @ W.H
    d = adapted_svd(sig, Y)
    assert (d.Theta - MatrixK.identity("C", 3)).norm() < 1e-10


def test_adapted_svd_random(entry, rng):
    sig = entry.spec.sigma
    for _ in range(10):
        Y = _sigma_compatible(sig, rng)
        d = adapted_svd(sig, Y)
        assert d.residuals["sigma_Theta"] < 1e-8
        assert d.residuals["svd_reconstruction"] < 1e-10 * max(1.0, Y.norm())


# -- reduction --------------------------------------------------------------


def test_reduction_of_a_diagonal_matrix_is_trivial():
    sig = Automorphism(MatrixK.identity("C", 2))
    X = MatrixK.from_real_diag("C", [0.5, 1.5])
    red = reduce_to_diagonal(sig, X)
    for M in (red.U, red.V, red.Theta):
        assert (M - MatrixK.identity("C", 2)).norm() < 1e-12


def test_reduction_second_function():
    red = reduce_to_diagonal(SIG63, X63)
    B = diagonal_critical_points(red.sigma_prime, red.D)
    assert len(B) == 4
    pts = [red.from_diagonal(b) for b in B]
    for P in pts:
        assert is_in_cartan_model(SIG63, P)[0] and is_critical_model(SIG63, X63, P)[0]
        assert not is_critical_group(X63, P)[0]
    recs = oracle_critical_set(SIG63, X63, "model", OracleConfig(restarts=16))
    assert len(recs) == 4
    for r in recs:
        assert min((r.A - P).norm() for P in pts) < 1e-8
        assert r.is_morse_point
    vals = sorted(height(X63, P) for P in pts)
    assert vals == pytest.approx(sorted([s1 + s2 * R2X for s1 in (1, -1) for s2 in (1, -1)]))
    obj = reduction_to_json(red)
    assert len(obj["critical_points"]) == 4 and "sigma_prime" in obj


def test_reduction_transports_gradient_and_hessian(entry, rng):
    sig = entry.spec.sigma
    X = random_matrix(entry.spec.n, entry.spec.field, rng)
    red = reduce_to_diagonal(sig, X)
    from symflow.symmetric_space import random_model_point

    for _ in range(5):
        A = random_model_point(sig, X.field, X.n, rng)
        B = red.to_diagonal(A)
        assert is_in_cartan_model(red.sigma_prime, B, 1e-9)[0]
        assert height(X, A) == pytest.approx(0.5 * height(red.D, B))
        gX = grad_model(sig, X, A)
        gD = grad_model(red.sigma_prime, red.D, B)
        assert (gX - 0.5 * red.from_diagonal(gD)).norm() < 1e-10
        for W in tangent_basis_model(sig, A)[:3]:
            HX = hessian_model(sig, X, A, W)
            HD = hessian_model(red.sigma_prime, red.D, B, red.to_diagonal(W))
            assert (HX - 0.5 * red.from_diagonal(HD)).norm() < 1e-10


def test_reduction_matches_oracle_on_sp1(rng):
    sig = get_entry("sp1_u1").spec.sigma
    for _ in range(5):
        X = random_matrix(1, "H", rng)
        red = reduce_to_diagonal(sig, X)
        mine = [red.from_diagonal(B) for B in diagonal_critical_points(red.sigma_prime, red.D)]
        recs = oracle_critical_set(sig, X, "model", OracleConfig(restarts=8))
        assert len(recs) == len(mine) == 2
        for r in recs:
            assert min((r.A - P).norm() for P in mine) < 1e-8
            assert r.value == pytest.approx(0.5 * height(red.D, red.to_diagonal(r.A)))


# -- block structure ----------------------------------------------------------


def test_blocks_distinct_values():
    D = MatrixK.from_real_diag("H", [2.0, 2 * R2X])
    for signs in itertools.product((1.0, -1.0), repeat=2):
        A = MatrixK.from_real_diag("H", signs)
        st_ = critical_blocks_diagonal(D, A)
        assert st_.block_sizes == (0, 1, 1)
        assert st_.critical_value == pytest.approx(st_.height_value, abs=1e-12)
        assert st_.critical_value == pytest.approx(critical_value_from_signs(D, list(signs)))


def test_blocks_repeated_value(rng):
    D = MatrixK.from_real_diag("H", [R2X, R2X])
    from symflow.cayley import chart_space, chart_to_critical

    P = MatrixK.from_real_diag("H", [1.0, -1.0])
    cs = chart_space(None, D, P)
    beta = MatrixK("H", sum(c * b.a for c, b in zip(rng.standard_normal(4), cs.basis)))
    A = chart_to_critical(None, D, P, 0.4 * beta)
    st_ = critical_blocks_diagonal(D, A)
    assert st_.signatures[1] == (1, 1) and st_.critical_value == pytest.approx(0, abs=1e-10)
    for s in (1.0, -1.0):
        st_ = critical_blocks_diagonal(D, s * MatrixK.identity("H", 2))
        assert st_.signatures[1] == ((2, 0) if s > 0 else (0, 2))


def test_blocks_zero_block(rng):
    D = MatrixK.from_real_diag("C", [0.0, 0.0, 1.0])
    U2 = random_group_element(2, "C", rng)
    A = MatrixK("C", np.block([[U2.a, np.zeros((2, 1))], [np.zeros((1, 2)), -np.eye(1)]]))
    st_ = critical_blocks_diagonal(D, A)
    assert st_.block_sizes == (2, 1) and st_.critical_value == pytest.approx(-1)


def test_blocks_reject_non_critical(rng):
    D = MatrixK.from_real_diag("C", [1.0, 2.0])
    with pytest.raises(StructureViolated):
        critical_blocks_diagonal(D, random_group_element(2, "C", rng))


# -- Morse classification --------------------------------------------------------


def test_is_morse_examples(rng):
    U, V = random_group_element(3, "C", rng), random_group_element(3, "C", rng)
    X = U @ MatrixK.from_real_diag("C", [1.0, 2.0, 3.0]) @ V.H
    assert is_morse(None, X)[0]
    ok, why = is_morse(None, X63)
    assert not ok and "repeated" in why
    ok, why = is_morse(SIG63, X63, mode="model", oracle_cfg=OracleConfig(restarts=16))
    assert ok and "4" in why and "empirical" in why
    assert not is_morse(None, MatrixK.from_real_diag("R", [0.0, 1.0]))[0]


def test_decomposition_json(rng):
    sig = get_entry("sp1_u1").spec.sigma
    Y = _sigma_compatible(sig, rng)
    obj = decomposition_to_json(adapted_svd(sig, Y))
    assert set(obj) == {"U", "D", "V", "S", "Omega", "Theta", "block_sizes", "values", "residuals"}
    assert obj["Theta"] is not None
    obj = decomposition_to_json(svd_canonical(Y))
    assert obj["S"] is None and obj["residuals"]["reconstruction"] < 1e-12
