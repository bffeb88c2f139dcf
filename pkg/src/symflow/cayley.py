"""Generalized Cayley transform and closed-form gradient flows.

``c_A(X) = (I - A* X)(A + X)^{-1}`` maps the chart ``Omega(A)`` (matrices
with ``A + X`` invertible) onto ``Omega(A*)`` with inverse ``c_{A*}``.  Along
a height-function gradient flow centred at a critical point ``A`` the
transformed curve ``beta = c_A(alpha)`` evolves linearly, which gives the
flow in closed form.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

from .errors import (
    NotCritical,
    NotCriticalCenter,
    OutsideDomain,
    SingularEvaluation,
    StepRejected,
)
from .group import group_defect
from .height import critical_residual, critical_tol, grad_model, height, xhat
from .scalar_matrix import MatrixK, expm_array, sinh_cosh
from .symmetric_space import (
    Automorphism,
    apply_sigma,
    model_defect,
    real_coords_stack,
    tangent_basis_model,
)
from .tolerances import TOL


def _sing_ok(M: np.ndarray) -> bool:
    s = np.linalg.svd(M, compute_uv=False)
    return s[-1] > TOL.singular * max(np.linalg.norm(M), 1.0)


def in_omega(A: MatrixK, X: MatrixK) -> bool:
    return _sing_ok((A + X).a)


def cayley(A: MatrixK, X: MatrixK) -> MatrixK:
    S = (A + X).a
    if not _sing_ok(S):
        raise OutsideDomain("A + X is singular")
    I = np.eye(S.shape[0])
    num = I - A.a.conj().T @ X.a
    return MatrixK(A.field, np.linalg.solve(S.T, num.T).T)


def cayley_left(A: MatrixK, X: MatrixK) -> MatrixK:
    """The equivalent form ``(A + X)^{-1}(I - X A*)``."""
    S = (A + X).a
    if not _sing_ok(S):
        raise OutsideDomain("A + X is singular")
    I = np.eye(S.shape[0])
    return MatrixK(A.field, np.linalg.solve(S, I - X.a @ A.a.conj().T))


def retract(A: MatrixK, W: MatrixK) -> MatrixK:
    """Cayley retraction: the point ``c_{A*}(beta)`` whose velocity at 0 is ``W``.

    ``c_{A*}(beta) = A - 2 A beta A + O(beta^2)``, so ``beta = -A* W A* / 2``.
    For ``W`` tangent to the group (or to a Cartan model) at ``A``, ``beta`` is
    tangent at ``A*`` and the image stays on the group (model).
    """
    As = A.H
    beta = -0.5 * (As @ W @ As)
    return cayley(As, beta)


def sigma_commutation_check(sigma: Automorphism, A: MatrixK, X: MatrixK) -> float:
    """``|c_{sigma(A)}(sigma(X)) - sigma(c_A(X))|_F``."""
    lhs = cayley(apply_sigma(sigma, A), apply_sigma(sigma, X))
    rhs = apply_sigma(sigma, cayley(A, X))
    return (lhs - rhs).norm()


def contraction(A: MatrixK, X: MatrixK, t: float) -> MatrixK:
    """``c_{A*}(t c_A(X))``: contracts the chart ``Omega(A)`` onto ``A``."""
    return cayley(A.H, t * cayley(A, X))


# -- closed-form flow ------------------------------------------------------


def _check_center(sigma, X, A, tol):
    tol = critical_tol(sigma, X) if tol is None else tol
    r = critical_residual(sigma, X, A)
    if r > tol:
        raise NotCriticalCenter(f"center is not critical (residual {r:.3e})")


def beta_curve(sigma: Automorphism | None, X: MatrixK, A: MatrixK, alpha0: MatrixK, t: float) -> MatrixK:
    """Linearized flow ``exp(-t A* Xhat / 4) beta0 exp(-t Xhat A* / 4)`` with ``beta0 = c_A(alpha0)``."""
    Xh = xhat(sigma, X)
    beta0 = cayley(A, alpha0)
    L = expm_array(-0.25 * t * (A.H @ Xh).a)
    R = expm_array(-0.25 * t * (Xh @ A.H).a)
    return MatrixK(A.field, L @ beta0.a @ R)


def flow_via_beta(sigma, X, A, alpha0, t) -> MatrixK:
    return cayley(A.H, beta_curve(sigma, X, A, alpha0, t))


def flow_closed_form(sigma: Automorphism | None, X: MatrixK, A: MatrixK, alpha0: MatrixK, t: float, tol: float | None = None) -> MatrixK:
    """Point at time ``t`` on the gradient-ascent line through ``alpha0``.

    ``A`` must be a critical point with ``alpha0`` in its Cayley chart.
    Evaluates ``A (sinh Z + cosh Z A* alpha0)(cosh Z + sinh Z A* alpha0)^{-1}``
    with ``Z = t A* Xhat / 4``.
    """
    _check_center(sigma, X, A, tol)
    if not in_omega(A, alpha0):
        raise OutsideDomain("alpha0 is outside the Cayley chart of the center")
    Xh = xhat(sigma, X)
    sh, ch = sinh_cosh((0.25 * t) * (A.H @ Xh))
    P = A.H @ alpha0
    num = sh + ch @ P
    den = ch + sh @ P
    if not _sing_ok(den.a):
        raise SingularEvaluation(t)
    return MatrixK(A.field, A.a @ np.linalg.solve(den.a.T, num.a.T).T)


# -- numerical integration -------------------------------------------------


@dataclasses.dataclass
class FlowTrace:
    times: list
    points: list
    heights: list
    grad_norms: list
    model_defects: list

    def to_csv(self, method: str | None = None) -> str:
        """CSV with one row per sample; a leading ``method`` column when ``method`` is given."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        lead = ["method"] if method else []
        w.writerow([*lead, "t", *entry_columns(self.points[0]), "height", "grad_norm", "model_defect"])
        tag = [method] if method else []
        for t, P, h, g, d in zip(self.times, self.points, self.heights, self.grad_norms, self.model_defects):
            w.writerow([*tag, repr(float(t)), *[repr(float(v)) for v in entry_values(P)], repr(h), repr(g), repr(d)])
        return buf.getvalue()


def entry_columns(P: MatrixK) -> list[str]:
    n = P.n
    suffix = {"R": [""], "C": ["_re", "_im"], "H": ["_w", "_x", "_y", "_z"]}[P.field]
    return [f"a{i + 1}{j + 1}{s}" for i in range(n) for j in range(n) for s in suffix]


def entry_values(P: MatrixK) -> np.ndarray:
    c = P.components()
    if P.field == "C":
        c = np.stack([c.real, c.imag], axis=-1)
    return np.asarray(c, dtype=float).ravel()


def _trace_point(sigma, X, P, defect_sigma):
    g = grad_model(sigma, X, P).norm()
    return height(X, P), g, model_defect(defect_sigma, P)


def _polar_unitary(a: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(a)
    return u @ vh


_SAME = object()


def flow_numeric(sigma: Automorphism | None, X: MatrixK, alpha0: MatrixK, t_grid: Sequence[float], step: float = 1e-3, defect_sigma=_SAME) -> FlowTrace:
    """Fixed-step RK4 for ``4 alpha' = Xhat - alpha Xhat* alpha`` from ``t = 0``.

    After every step the iterate is replaced by its unitary polar factor; the
    model condition is recorded, never enforced.  ``defect_sigma`` selects the
    automorphism used to measure the model defect (defaults to ``sigma``).
    """
    if defect_sigma is _SAME:
        defect_sigma = sigma
    Xh = xhat(sigma, X).a
    Xhs = Xh.conj().T

    def rhs(a):
        return 0.25 * (Xh - a @ Xhs @ a)

    a = alpha0.a.copy()
    t = 0.0
    trace = FlowTrace([], [], [], [], [])
    for target in sorted(float(x) for x in t_grid):
        if target < t - 1e-15:
            raise ValueError("t_grid must be non-negative")
        span = target - t
        steps = max(int(math.ceil(span / step - 1e-9)), 0)
        h = span / steps if steps else 0.0
        for _ in range(steps):
            k1 = rhs(a)
            k2 = rhs(a + 0.5 * h * k1)
            k3 = rhs(a + 0.5 * h * k2)
            k4 = rhs(a + h * k3)
            a = a + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            d = group_defect(MatrixK(alpha0.field, a))
            if d > 1e-3:
                raise StepRejected(f"group defect {d:.3e} before projection at t={t:.4g}")
            a = _polar_unitary(a)
        t = target
        P = MatrixK(alpha0.field, a)
        hgt, g, dfc = _trace_point(sigma, X, P, defect_sigma)
        trace.times.append(t)
        trace.points.append(P)
        trace.heights.append(hgt)
        trace.grad_norms.append(g)
        trace.model_defects.append(dfc)
    return trace


def flow_closed_trace(sigma, X, A, alpha0, t_grid) -> FlowTrace:
    trace = FlowTrace([], [], [], [], [])
    for t in t_grid:
        P = flow_closed_form(sigma, X, A, alpha0, t)
        hgt, g, dfc = _trace_point(sigma, X, P, sigma)
        trace.times.append(float(t))
        trace.points.append(P)
        trace.heights.append(hgt)
        trace.grad_norms.append(g)
        trace.model_defects.append(dfc)
    return trace


def flow_transversality_demo(sigma: Automorphism, X: MatrixK, alpha0: MatrixK, t1: float = 2.0, samples: int = 21, step: float = 1e-3) -> dict:
    """Compare model defects of the group flow and of the model flow from ``alpha0``."""
    grid = np.linspace(0.0, t1, samples)
    group_tr = flow_numeric(None, X, alpha0, grid, step, defect_sigma=sigma)
    model_tr = flow_numeric(sigma, X, alpha0, grid, step)
    sigma_x_is_x_star = (apply_sigma(sigma, X) - X.H).norm() <= TOL.membership * max(1.0, X.norm())
    return {
        "times": [float(t) for t in grid],
        "group_flow_defects": group_tr.model_defects,
        "model_flow_defects": model_tr.model_defects,
        "max_group_defect": float(max(group_tr.model_defects)),
        "max_model_defect": float(max(model_tr.model_defects)),
        "sigma_X_equals_X_star": bool(sigma_x_is_x_star),
    }


# -- charts of critical submanifolds ----------------------------------------


@dataclasses.dataclass
class ChartSpace:
    base: MatrixK
    basis: list

    @property
    def dim(self) -> int:
        return len(self.basis)


def chart_space(sigma: Automorphism | None, X: MatrixK, A: MatrixK, tol: float | None = None) -> ChartSpace:
    """Tangent vectors at ``A*`` satisfying ``A* Xhat b + b Xhat A* = 0``."""
    tol = critical_tol(sigma, X) if tol is None else tol
    r = critical_residual(sigma, X, A)
    if r > tol:
        raise NotCritical(f"chart centre not critical (residual {r:.3e})")
    As = A.H
    T = tangent_basis_model(sigma, As)
    if not T:
        return ChartSpace(A, [])
    Xh = xhat(sigma, X).a
    B = np.stack([b.a for b in T])
    L = As.a @ Xh @ B + B @ Xh @ As.a
    M = real_coords_stack(A.field, L).T
    scale = max(np.linalg.norm(Xh), 1.0)
    if np.linalg.norm(M) <= 1e-14 * scale:
        coeffs = np.eye(len(T))
    else:
        coeffs = null_space(M, rcond=TOL.kernel_gap)
    basis = [MatrixK(A.field, np.tensordot(c, B, axes=1)) for c in coeffs.T]
    return ChartSpace(A, basis)


def chart_to_critical(sigma: Automorphism | None, X: MatrixK, A: MatrixK, beta0: MatrixK) -> MatrixK:
    """``c_{A*}(beta0)``: a critical point near ``A`` for ``beta0`` in the chart space."""
    return cayley(A.H, beta0)
