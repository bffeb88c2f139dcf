"""The compact groups O(n), U(n), Sp(n) and their tangent spaces."""

from __future__ import annotations

import numpy as np
from scipy.linalg import orth

from .scalar_matrix import MatrixK, expm_array, from_real, real_basis, to_real
from .tolerances import TOL


def group_defect(A: MatrixK) -> float:
    """``|A A* - I|_F``."""
    return (A @ A.H - MatrixK.identity(A.field, A.n)).norm()


def is_in_group(A: MatrixK, tol: float | None = None) -> tuple[bool, float]:
    tol = TOL.membership if tol is None else tol
    d = group_defect(A)
    return d <= tol, d


def project_skew(Z: MatrixK) -> MatrixK:
    """Orthogonal projection onto the Lie algebra: ``(Z - Z*)/2``."""
    return 0.5 * (Z - Z.H)


def project_hermitian(Z: MatrixK) -> MatrixK:
    return 0.5 * (Z + Z.H)


def tangent_defect(A: MatrixK, Y: MatrixK) -> float:
    return (Y @ A.H + A @ Y.H).norm()


def is_tangent_at(A: MatrixK, Y: MatrixK, tol: float | None = None) -> bool:
    tol = TOL.membership if tol is None else tol
    return tangent_defect(A, Y) <= tol


def determinant_sign(A: MatrixK) -> int:
    """+1 or -1 for real orthogonal matrices (component of O(n)); always +1 otherwise."""
    if A.field != "R":
        return 1
    return 1 if np.linalg.det(A.a) > 0 else -1


def skew_basis(field: str, n: int) -> list[MatrixK]:
    """Real-orthonormal basis of the Lie algebra of skew-Hermitian matrices."""
    cols = np.array([to_real(project_skew(E)) for E in real_basis(field, n)]).T
    q = orth(cols)
    return [from_real(field, n, q[:, k]) for k in range(q.shape[1])]


def lie_algebra_dim(field: str, n: int) -> int:
    return {"R": n * (n - 1) // 2, "C": n * n, "H": n * (2 * n + 1)}[field]


def random_skew(n: int, field: str, rng: np.random.Generator, scale: float = 1.0) -> MatrixK:
    d = {"R": 1, "C": 2, "H": 4}[field] * n * n
    Z = from_real(field, n, rng.standard_normal(d))
    return scale * project_skew(Z)


def random_group_element(n: int, field: str, seed=None, scale: float = 2.0) -> MatrixK:
    """Deterministic (in ``seed``) element of the identity component, as exp of a random skew matrix."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    S = random_skew(n, field, rng, scale)
    return MatrixK(field, expm_array(S.a))


def random_matrix(n: int, field: str, rng: np.random.Generator) -> MatrixK:
    d = {"R": 1, "C": 2, "H": 4}[field] * n * n
    return from_real(field, n, rng.standard_normal(d))
