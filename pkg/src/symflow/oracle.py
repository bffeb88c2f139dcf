"""Brute-force critical-set oracle and finite-difference gradient checks.

Critical points are found by multistart search: each restart takes a short
run of gradient ascent or descent (or none, for saddle hunting), followed by
Riemannian Newton iterations on the gradient equation.  The Newton step uses
the pseudo-inverse of the Hessian, i.e. Gauss-Newton on ``|grad|^2``, so it
also converges to saddles and, transversally, to Morse-Bott families.
"""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .cayley import cayley, chart_space, entry_values, in_omega, retract
from .errors import NonConvergence, OutsideDomain, SingularMatrix
from .group import group_defect
from .height import (
    CriticalPointRecord,
    critical_residual,
    critical_tol,
    grad_model,
    height,
    hessian_matrix,
    hessian_spectrum,
)
from .scalar_matrix import MatrixK
from .symmetric_space import Automorphism, random_model_point, real_coords_stack, tangent_basis_model
from .tolerances import TOL

log = logging.getLogger(__name__)


@dataclasses.dataclass
class OracleConfig:
    restarts: int = 24
    max_iters: int = 60
    step: float = 0.5
    cluster_radius: float = 1e-4
    seed: int = 0
    flow_iters: int = 25
    workers: int = 1


def _as_sigma(space) -> Automorphism | None:
    """Accept an Automorphism, a SymmetricSpaceSpec, a catalog entry or None."""
    if space is None or isinstance(space, Automorphism):
        return space
    if hasattr(space, "spec"):
        space = space.spec
    return getattr(space, "sigma", None)


def _polar(A: MatrixK) -> MatrixK:
    u, _, vh = np.linalg.svd(A.a)
    return MatrixK(A.field, u @ vh)


def _step(A: MatrixK, W: MatrixK) -> MatrixK:
    try:
        B = retract(A, W)
    except (OutsideDomain, SingularMatrix, np.linalg.LinAlgError):
        B = A + W
    return _polar(B)


def _coords(field: str, basis: Sequence[MatrixK], Z: MatrixK) -> np.ndarray:
    B = real_coords_stack(field, np.stack([b.a for b in basis]))
    return B @ real_coords_stack(field, Z.a[None])[0]


def _combine(field: str, basis: Sequence[MatrixK], c: np.ndarray) -> MatrixK:
    return MatrixK(field, np.tensordot(c, np.stack([b.a for b in basis]), axes=1))


def _search(sigma, X: MatrixK, mode_sigma, A: MatrixK, direction: int, cfg: OracleConfig, tol: float):
    """One restart; returns the polished point or None."""
    f = A.field
    gscale = max(X.norm(), 1.0)
    for _ in range(cfg.flow_iters if direction else 0):
        G = grad_model(mode_sigma, X, A)
        A = _step(A, (direction * cfg.step / gscale) * G)
    for _ in range(cfg.max_iters):
        res = critical_residual(mode_sigma, X, A)
        if res <= 0.01 * tol:
            break
        basis = tangent_basis_model(mode_sigma, A)
        if not basis:
            break
        G = grad_model(mode_sigma, X, A)
        g = _coords(f, basis, G)
        H = hessian_matrix(mode_sigma, X, A, basis)
        H = 0.5 * (H + H.T)
        w, Q = np.linalg.eigh(H)
        cut = TOL.kernel_gap * max(np.max(np.abs(w)), TOL.kernel_floor)
        inv = np.where(np.abs(w) > cut, 1.0 / np.where(w == 0, 1.0, w), 0.0)
        d = -(Q @ (inv * (Q.T @ g)))
        nd = np.linalg.norm(d)
        if nd > 0.5:
            d *= 0.5 / nd
        A = _step(A, _combine(f, basis, d))
    res = critical_residual(mode_sigma, X, A)
    if res > tol:
        return None
    return A


def _restart(args):
    sigma, X, mode_sigma, seed, direction, cfg, tol = args
    rng = np.random.default_rng(seed)
    A0 = random_model_point(mode_sigma, X.field, X.n, rng)
    try:
        return _search(sigma, X, mode_sigma, A0, direction, cfg, tol)
    except (np.linalg.LinAlgError, SingularMatrix, OutsideDomain) as exc:
        log.info("restart failed: %s", exc)
        return None


def _sort_key(rec: CriticalPointRecord):
    return (round(rec.value, 8), tuple(np.round(entry_values(rec.A), 8)))


def oracle_critical_set(space, X: MatrixK, mode: str = "model", cfg: OracleConfig | None = None, tol: float | None = None) -> list[CriticalPointRecord]:
    """Critical points of ``h_X`` on the group (``mode="group"``) or the Cartan model.

    Converged points are clustered by Frobenius distance; each record carries
    the Hessian spectrum at the cluster representative and the cluster size.
    Clusters are sorted by height, then by entries.
    """
    cfg = OracleConfig() if cfg is None else cfg
    sigma = _as_sigma(space)
    if mode not in ("group", "model"):
        raise ValueError("mode must be 'group' or 'model'")
    mode_sigma = None if mode == "group" else sigma
    if mode == "model" and sigma is None:
        raise ValueError("model mode needs an automorphism")
    tol = critical_tol(mode_sigma, X) if tol is None else tol
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    jobs = [(sigma, X, mode_sigma, s, (1, -1, 0, 0)[k % 4], cfg, tol) for k, s in enumerate(seeds)]
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            found = list(ex.map(_restart, jobs))
    else:
        found = [_restart(j) for j in jobs]
    failures = sum(p is None for p in found)
    if failures:
        log.info("%d of %d restarts did not converge", failures, len(found))
    clusters: list[list[MatrixK]] = []
    for P in found:
        if P is None:
            continue
        for c in clusters:
            if (c[0] - P).norm() <= cfg.cluster_radius:
                c.append(P)
                break
        else:
            clusters.append([P])
    records = []
    for c in clusters:
        rec = hessian_spectrum(mode_sigma, X, c[0], tol=tol, strict=False)
        rec.cluster_size = len(c)
        records.append(rec)
    records.sort(key=_sort_key)
    return records


def same_component(mode_sigma, X: MatrixK, A: MatrixK, B: MatrixK, tol: float = 1e-6) -> bool:
    """Whether two critical points lie on one critical component.

    Inside the Cayley chart of ``A`` the critical set is exactly the image of
    the linear chart space, which is connected; so ``B`` joins ``A`` iff
    ``A + B`` is invertible and ``c_A(B)`` lies in that space.
    """
    if abs(height(X, A) - height(X, B)) > 1e-7 * max(1.0, X.norm()):
        return False
    if not in_omega(A, B):
        return False
    beta = cayley(A, B)
    cs = chart_space(mode_sigma, X, A)
    if cs.dim == 0:
        return beta.norm() <= tol
    c = _coords(A.field, cs.basis, beta)
    return (beta - _combine(A.field, cs.basis, c)).norm() <= tol * max(1.0, beta.norm())


def group_components(space, X: MatrixK, records: Sequence[CriticalPointRecord], mode: str = "model") -> list[list[int]]:
    """Partition record indices into critical components (union-find on chart overlaps)."""
    mode_sigma = None if mode == "group" else _as_sigma(space)
    parent = list(range(len(records)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(records)):
        for j in range(i + 1, len(records)):
            if find(i) == find(j):
                continue
            if same_component(mode_sigma, X, records[i].A, records[j].A):
                parent[find(j)] = find(i)
    comps: dict = {}
    for i in range(len(records)):
        comps.setdefault(find(i), []).append(i)
    return sorted(comps.values(), key=lambda c: (records[c[0]].value, c[0]))


def finite_difference_check(space, X: MatrixK, mode: str = "model", samples: int = 10, seed=0, h: float = 1e-6, grad_fn: Callable | None = None) -> float:
    """Max relative error between ``<grad, W>`` and central differences of the height
    along Cayley-retracted unit tangent directions ``W`` at random points.

    ``grad_fn(sigma, X, A)`` replaces the analytic gradient (negative-control hook).
    """
    sigma = None if mode == "group" else _as_sigma(space)
    grad_fn = grad_model if grad_fn is None else grad_fn
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        A = random_model_point(sigma, X.field, X.n, rng)
        basis = tangent_basis_model(sigma, A)
        if not basis:
            continue
        c = rng.standard_normal(len(basis))
        W = _combine(A.field, basis, c / np.linalg.norm(c))
        G = grad_fn(sigma, X, A)
        analytic = float(_coords(A.field, [W], G)[0])
        fd = (height(X, retract(A, h * W)) - height(X, retract(A, -h * W))) / (2 * h)
        scale = max(abs(analytic), abs(fd), 1e-3 * max(1.0, X.norm()))
        worst = max(worst, abs(analytic - fd) / scale)
    return worst
