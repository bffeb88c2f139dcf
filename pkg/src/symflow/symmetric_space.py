"""Involutive automorphisms, Cartan models and their tangent spaces.

An automorphism is stored as ``sigma(X) = C op(X) C^{-1}`` where ``op`` is the
identity or entrywise complex conjugation.  ``sigma = None`` is accepted
throughout the package as "pure group mode": the space is the whole group.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.linalg import null_space

from .errors import HypothesisViolated, IncompatibleAutomorphism, ValidationFailure
from .group import group_defect, random_group_element, random_matrix, skew_basis
from .scalar_matrix import MatrixK, adjoint_to_quat, mat_inverse
from .tolerances import TOL


@dataclasses.dataclass(frozen=True, eq=False)
class Automorphism:
    conjugator: MatrixK
    entrywise_conjugation: bool = False

    def __post_init__(self):
        if self.entrywise_conjugation and self.conjugator.field == "H":
            raise IncompatibleAutomorphism(
                "entrywise conjugation reverses quaternion products"
            )
        object.__setattr__(self, "_cinv", mat_inverse(self.conjugator).a)

    @property
    def field(self) -> str:
        return self.conjugator.field

    @property
    def n(self) -> int:
        return self.conjugator.n

    def apply_array(self, a: np.ndarray) -> np.ndarray:
        """Apply to a complex-form array, or a stack of them."""
        if self.entrywise_conjugation:
            a = a.conj()
        return self.conjugator.a @ a @ self._cinv

    def __call__(self, X: MatrixK) -> MatrixK:
        return apply_sigma(self, X)

    def to_json(self) -> dict:
        from .scalar_matrix import matrix_to_json

        return {
            "conjugator": matrix_to_json(self.conjugator),
            "entrywise_conjugation": bool(self.entrywise_conjugation),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Automorphism":
        from .scalar_matrix import matrix_from_json

        return cls(matrix_from_json(obj["conjugator"]), bool(obj.get("entrywise_conjugation", False)))


@dataclasses.dataclass(frozen=True, eq=False)
class SymmetricSpaceSpec:
    name: str
    field: str
    n: int
    sigma: Automorphism | None = None

    @property
    def group_mode(self) -> bool:
        return self.sigma is None

    def to_json(self) -> dict:
        out = {"name": self.name, "field": self.field, "n": self.n}
        if self.sigma is not None:
            out["sigma"] = self.sigma.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SymmetricSpaceSpec":
        sigma = Automorphism.from_json(obj["sigma"]) if obj.get("sigma") else None
        spec = cls(obj["name"], obj["field"], int(obj["n"]), sigma)
        if sigma is not None and (sigma.field != spec.field or sigma.n != spec.n):
            raise ValueError("sigma conjugator does not match the declared field/size")
        return spec


def apply_sigma(sigma: Automorphism, X: MatrixK) -> MatrixK:
    if X.field != sigma.field or X.n != sigma.n:
        raise IncompatibleAutomorphism(
            f"sigma acts on {sigma.field}{sigma.n}, got {X.field}{X.n}"
        )
    return MatrixK(X.field, sigma.apply_array(X.a))


def validate_automorphism(sigma: Automorphism, samples: int = 10, seed=0, tol: float = 1e-10) -> dict:
    """Spot-check the four automorphism axioms on random matrices.

    Returns the max residual per property; raises ValidationFailure listing
    every property above ``tol``.
    """
    rng = np.random.default_rng(seed)
    f, n = sigma.field, sigma.n
    I = MatrixK.identity(f, n)
    res = {
        "identity": (apply_sigma(sigma, I) - I).norm(),
        "involution": 0.0,
        "multiplicative": 0.0,
        "star": 0.0,
    }
    for _ in range(samples):
        X = random_matrix(n, f, rng)
        Y = random_matrix(n, f, rng)
        sX = apply_sigma(sigma, X)
        scale = max(X.norm(), 1.0)
        res["involution"] = max(res["involution"], (apply_sigma(sigma, sX) - X).norm() / scale)
        lhs = apply_sigma(sigma, X @ Y)
        rhs = sX @ apply_sigma(sigma, Y)
        res["multiplicative"] = max(res["multiplicative"], (lhs - rhs).norm() / (scale * max(Y.norm(), 1.0)))
        res["star"] = max(res["star"], (apply_sigma(sigma, X.H) - sX.H).norm() / scale)
    bad = [k for k, v in res.items() if not v <= tol]
    if bad:
        raise ValidationFailure(bad, res)
    return res


def model_defect(sigma: Automorphism | None, A: MatrixK) -> float:
    """``|sigma(A) - A*|_F``; zero in group mode."""
    if sigma is None:
        return 0.0
    return (apply_sigma(sigma, A) - A.H).norm()


def is_in_cartan_model(sigma: Automorphism | None, A: MatrixK, tol: float | None = None) -> tuple[bool, float]:
    """Membership in ``N = {sigma(B) = B^{-1}}``, using ``B^{-1} = B*`` on the group."""
    tol = TOL.membership if tol is None else tol
    d = model_defect(sigma, A)
    return d <= tol and group_defect(A) <= tol, d


def cartan_embed(sigma: Automorphism, B: MatrixK) -> MatrixK:
    """``B sigma(B)^{-1}``; for group elements ``sigma(B)^{-1} = sigma(B)*``."""
    return B @ apply_sigma(sigma, B).H


def translate_model(sigma: Automorphism, B: MatrixK, A: MatrixK) -> MatrixK:
    """Isometric action ``A -> B A sigma(B)^{-1}`` of the group on the model."""
    return B @ A @ apply_sigma(sigma, B).H


def random_model_point(sigma: Automorphism | None, field: str, n: int, rng) -> MatrixK:
    B = random_group_element(n, field, rng)
    if sigma is None:
        return B
    return cartan_embed(sigma, B)


# -- tangent spaces --------------------------------------------------------

_SKEW_CACHE: dict = {}


def _skew_stack(field: str, n: int) -> np.ndarray:
    key = (field, n)
    if key not in _SKEW_CACHE:
        m = 2 * n if field == "H" else n
        mats = [S.a for S in skew_basis(field, n)]
        dtype = float if field == "R" else complex
        _SKEW_CACHE[key] = np.stack(mats) if mats else np.zeros((0, m, m), dtype=dtype)
    return _SKEW_CACHE[key]


def real_coords_stack(field: str, a: np.ndarray) -> np.ndarray:
    """Rows of isometric real coordinates for a stack (k, m, m) of complex-form arrays."""
    k = a.shape[0]
    if field == "R":
        return a.reshape(k, -1).real
    if field == "C":
        return np.concatenate([a.real.reshape(k, -1), a.imag.reshape(k, -1)], axis=1)
    return adjoint_to_quat(a).reshape(k, -1)


def tangent_basis_model(sigma: Automorphism | None, A: MatrixK, rel_tol: float = 1e-8) -> list[MatrixK]:
    """Real-orthonormal basis of ``{Y : Y A* + A Y* = 0, sigma(Y) = Y*}``.

    Writing ``Y = S A`` with ``S`` skew, the second condition becomes
    ``sigma(S) + A* S A = 0`` (using ``sigma(A) = A*``), a linear system on
    the Lie algebra whose real null space is computed by SVD.
    """
    S = _skew_stack(A.field, A.n)
    if len(S) == 0:
        return []
    if sigma is None:
        return [MatrixK(A.field, s @ A.a) for s in S]
    resid = sigma.apply_array(S) + A.a.conj().T @ S @ A.a
    M = real_coords_stack(A.field, resid).T
    if M.size == 0 or not np.any(M):
        coeffs = np.eye(len(S))
    else:
        coeffs = null_space(M, rcond=rel_tol)
    out = []
    for c in coeffs.T:
        Y = np.tensordot(c, S, axes=1) @ A.a
        out.append(MatrixK(A.field, Y))
    return out


def tangent_defects(sigma: Automorphism | None, A: MatrixK, Y: MatrixK) -> tuple[float, float]:
    """Residuals of the two tangency conditions at ``A``."""
    t = (Y @ A.H + A @ Y.H).norm()
    s = 0.0 if sigma is None else (apply_sigma(sigma, Y) - Y.H).norm()
    return t, s


def model_dimension(sigma: Automorphism | None, field: str, n: int) -> int:
    return len(tangent_basis_model(sigma, MatrixK.identity(field, n)))


# -- twisted automorphism --------------------------------------------------


def twist_automorphism(sigma: Automorphism, Theta: MatrixK, tol: float | None = None) -> Automorphism:
    """``sigma'(X) = Theta sigma(X) Theta*``, valid when ``sigma(Theta) = Theta*``."""
    tol = TOL.membership if tol is None else tol
    d = (apply_sigma(sigma, Theta) - Theta.H).norm()
    if d > tol:
        raise HypothesisViolated(f"sigma(Theta) != Theta* (residual {d:.3e})")
    return Automorphism(Theta @ sigma.conjugator, sigma.entrywise_conjugation)


def sigma_from_matrix(C: MatrixK, entrywise_conjugation: bool = False) -> Automorphism:
    return Automorphism(C, entrywise_conjugation)


def fixed_point_defect(sigma: Automorphism, B: MatrixK) -> float:
    return (apply_sigma(sigma, B) - B).norm()


def quaternion_unit(name: str) -> MatrixK:
    comps = {"1": [1, 0, 0, 0], "i": [0, 1, 0, 0], "j": [0, 0, 1, 0], "k": [0, 0, 0, 1]}[name]
    return MatrixK.from_quaternion(comps)


def scalar_times_identity(q: MatrixK, n: int) -> MatrixK:
    """n x n diagonal matrix with the 1 x 1 entry ``q`` repeated."""
    comps = q.components().reshape(-1)
    if q.field != "H":
        return MatrixK(q.field, np.eye(n) * q.a[0, 0])
    return MatrixK.diag("H", [comps] * n)

