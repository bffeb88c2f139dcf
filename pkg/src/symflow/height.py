"""Height functions ``h_X(A) = Re Tr(X A)`` on the group and on Cartan models.

Model-side formulas are written in terms of ``Xhat = X* + sigma(X)``.  The
group case reuses them with ``Xhat`` replaced by ``2 X*`` (``sigma=None``),
so a single code path serves both.  Since ``sigma(Xhat) = Xhat*`` in both
cases, ``Xhat*`` is used wherever ``sigma(Xhat)`` appears.
"""

from __future__ import annotations

import dataclasses
from typing import Sequence

import numpy as np

from .errors import NotCritical, RelationViolated
from .scalar_matrix import MatrixK, matrix_to_json
from .symmetric_space import (
    Automorphism,
    apply_sigma,
    is_in_cartan_model,
    real_coords_stack,
    tangent_basis_model,
)
from .tolerances import TOL


def height(X: MatrixK, A: MatrixK) -> float:
    return (X @ A).re_trace()


def xhat(sigma: Automorphism | None, X: MatrixK, check: bool = False) -> MatrixK:
    """``X* + sigma(X)``, or ``2 X*`` in group mode."""
    if sigma is None:
        return 2.0 * X.H
    Xh = X.H + apply_sigma(sigma, X)
    if check:
        r = (apply_sigma(sigma, Xh) - Xh.H).norm()
        if r > TOL.membership * max(1.0, Xh.norm()):
            raise ArithmeticError(f"sigma(Xhat) != Xhat* (residual {r:.3e})")
    return Xh


def grad_group(X: MatrixK, A: MatrixK) -> MatrixK:
    return 0.5 * (X.H - A @ X @ A)


def grad_model(sigma: Automorphism | None, X: MatrixK, A: MatrixK) -> MatrixK:
    if sigma is None:
        return grad_group(X, A)
    Xh = xhat(sigma, X)
    return 0.25 * (Xh - A @ apply_sigma(sigma, Xh) @ A)


def hessian_model(sigma: Automorphism | None, X: MatrixK, A: MatrixK, W: MatrixK) -> MatrixK:
    """Hessian operator at ``A`` applied to a tangent vector ``W``."""
    Xh = xhat(sigma, X)
    sXh = Xh.H if sigma is None else apply_sigma(sigma, Xh)
    return -0.25 * (A @ sXh @ W + W @ sXh @ A)


def critical_residual(sigma: Automorphism | None, X: MatrixK, A: MatrixK) -> float:
    """``|Xhat - A sigma(Xhat) A|_F`` (equals ``2|X* - A X A|`` in group mode)."""
    Xh = xhat(sigma, X)
    return (Xh - A @ Xh.H @ A).norm()


def critical_tol(sigma: Automorphism | None, X: MatrixK) -> float:
    return TOL.critical * max(xhat(sigma, X).norm(), 1.0)


def is_critical_group(X: MatrixK, A: MatrixK, tol: float | None = None) -> tuple[bool, float]:
    r = (X.H - A @ X @ A).norm()
    tol = TOL.critical * max(X.norm(), 1.0) if tol is None else tol
    return r <= tol, r


def is_critical_model(sigma: Automorphism | None, X: MatrixK, A: MatrixK, tol: float | None = None) -> tuple[bool, float]:
    r = critical_residual(sigma, X, A)
    tol = critical_tol(sigma, X) if tol is None else tol
    return r <= tol, r


def hermitian_criterion_residual(sigma: Automorphism | None, X: MatrixK, A: MatrixK) -> float:
    """Distance of ``Xhat* A`` from being Hermitian; vanishes exactly at critical points."""
    Z = xhat(sigma, X).H @ A
    return (Z - Z.H).norm()


@dataclasses.dataclass
class CriticalPointRecord:
    A: MatrixK
    value: float
    hessian_eigenvalues: list
    kernel_dim: int
    is_morse_point: bool
    residual: float
    hessian_asymmetry: float = 0.0
    cluster_size: int = 1

    def to_json(self) -> dict:
        return {
            "point": matrix_to_json(self.A),
            "value": float(self.value),
            "residual": float(self.residual),
            "hessian_eigenvalues": [float(x) for x in self.hessian_eigenvalues],
            "kernel_dim": int(self.kernel_dim),
            "morse": bool(self.is_morse_point),
        }


def _stack(mats: Sequence[MatrixK]) -> np.ndarray:
    return np.stack([M.a for M in mats])


def hessian_matrix(sigma: Automorphism | None, X: MatrixK, A: MatrixK, basis: Sequence[MatrixK] | None = None) -> np.ndarray:
    """Real matrix ``<b_i, H(b_j)>`` of the Hessian in an orthonormal tangent basis."""
    if basis is None:
        basis = tangent_basis_model(sigma, A)
    if not basis:
        return np.zeros((0, 0))
    B = _stack(basis)
    Xh = xhat(sigma, X)
    sXh = Xh.H.a
    HB = -0.25 * (A.a @ sXh @ B + B @ sXh @ A.a)
    return real_coords_stack(A.field, B) @ real_coords_stack(A.field, HB).T


def kernel_dimension(eigs: np.ndarray) -> int:
    if len(eigs) == 0:
        return 0
    scale = max(float(np.max(np.abs(eigs))), TOL.kernel_floor)
    return int(np.sum(np.abs(eigs) < TOL.kernel_gap * scale))


def hessian_spectrum(sigma: Automorphism | None, X: MatrixK, A: MatrixK, tol: float | None = None, strict: bool = True) -> CriticalPointRecord:
    """Hessian eigenvalues, kernel dimension and Morse flag at a critical point.

    With ``strict`` a NotCritical error is raised when the residual exceeds the
    tolerance; the computed record is attached to the exception.
    """
    tol = critical_tol(sigma, X) if tol is None else tol
    res = critical_residual(sigma, X, A)
    Hm = hessian_matrix(sigma, X, A)
    asym = float(np.max(np.abs(Hm - Hm.T))) if Hm.size else 0.0
    eigs = np.linalg.eigvalsh(0.5 * (Hm + Hm.T)) if Hm.size else np.zeros(0)
    k = kernel_dimension(eigs)
    rec = CriticalPointRecord(
        A=A,
        value=height(X, A),
        hessian_eigenvalues=[float(e) for e in eigs],
        kernel_dim=k,
        is_morse_point=(k == 0),
        residual=res,
        hessian_asymmetry=asym,
    )
    if strict and res > tol:
        raise NotCritical(f"gradient residual {res:.3e} above {tol:.3e}", rec)
    return rec


def project_onto_tangent(sigma: Automorphism | None, A: MatrixK, Z: MatrixK, basis=None) -> MatrixK:
    """Orthogonal projection of ``Z`` onto the tangent space at ``A`` via an orthonormal basis."""
    if basis is None:
        basis = tangent_basis_model(sigma, A)
    if not basis:
        return MatrixK.zeros(A.field, A.n)
    B = _stack(basis)
    coeffs = real_coords_stack(A.field, B) @ real_coords_stack(A.field, Z.a[None])[0]
    return MatrixK(A.field, np.tensordot(coeffs, B, axes=1))


def distance_gradient_residual(sigma: Automorphism | None, X: MatrixK, A: MatrixK) -> float:
    """Tangential part of ``A - X*``: the gradient of half the squared distance to ``X*``."""
    return project_onto_tangent(sigma, A, A - X.H).norm()


def critical_inclusion_check(sigma: Automorphism, X: MatrixK, group_points: Sequence[MatrixK], model_points: Sequence[MatrixK], tol: float | None = None) -> dict:
    """Check the relations between group and model critical sets on given points.

    * every model critical point is critical for ``h_{sigma(Xhat)}`` on the group;
    * every group critical point lying in the model is model-critical;
    * if ``sigma(X) = X*``, every model critical point is group-critical.
    """
    tol = critical_tol(sigma, X) if tol is None else tol
    Xh = xhat(sigma, X)
    sXh = apply_sigma(sigma, Xh)
    report = {
        "model_critical_are_twisted_group_critical": True,
        "group_critical_in_model_are_model_critical": True,
        "sigma_X_equals_X_star": False,
        "model_critical_are_group_critical": None,
        "group_points_in_model": 0,
    }
    for idx, A in enumerate(model_points):
        _, r = is_critical_group(sXh, A, tol=tol)
        if r > tol:
            raise RelationViolated("model critical point not critical for h_{sigma(Xhat)} on G", idx, r)
    for idx, A in enumerate(group_points):
        inside, _ = is_in_cartan_model(sigma, A)
        if not inside:
            continue
        report["group_points_in_model"] += 1
        _, r = is_critical_model(sigma, X, A, tol=tol)
        if r > tol:
            raise RelationViolated("group critical point in M not critical on M", idx, r)
    if (apply_sigma(sigma, X) - X.H).norm() <= TOL.membership * max(1.0, X.norm()):
        report["sigma_X_equals_X_star"] = True
        for idx, A in enumerate(model_points):
            _, r = is_critical_group(X, A, tol=tol)
            if r > tol:
                raise RelationViolated("model critical point not group critical although sigma(X) = X*", idx, r)
        report["model_critical_are_group_critical"] = True
    return report


def critical_value_from_signs(D, signs) -> float:
    """Critical value ``sum_i t_i Tr E_i`` from per-block sign patterns.

    ``D`` is either a canonical diagonal MatrixK or a sequence of the distinct
    positive block values ``t_1 < ... < t_k``.  ``signs`` is a list with one
    sequence of +-1 per positive block (a flat list, one sign per positive
    diagonal entry, is also accepted when ``D`` is a matrix).
    """
    if isinstance(D, MatrixK):
        from .decomposition import diagonal_blocks

        _, values, sizes = diagonal_blocks(D)
        if signs and np.isscalar(signs[0]):
            flat = list(signs)
            if len(flat) != sum(sizes):
                raise ValueError("need one sign per positive diagonal entry")
            signs, pos = [], 0
            for s in sizes:
                signs.append(flat[pos:pos + s])
                pos += s
    else:
        values = list(D)
    if len(signs) != len(values):
        raise ValueError(f"{len(values)} blocks but {len(signs)} sign groups")
    total = 0.0
    for t, eps in zip(values, signs):
        if any(e not in (1, -1) for e in eps):
            raise ValueError("signs must be +1 or -1")
        total += t * sum(eps)
    return float(total)
