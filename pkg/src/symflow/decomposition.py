"""Canonical SVD, polar forms and decompositions adapted to an automorphism.

Quaternion factorizations go through the complex adjoint: numpy factors the
2n x 2n adjoint, and every invariant subspace is then re-expressed with a
quaternion-orthonormal basis so the factors are genuine quaternion matrices.
"""

from __future__ import annotations

import dataclasses
import itertools

import numpy as np

from .errors import (
    HypothesisViolated,
    NonConvergence,
    NotCritical,
    NotSquareRoot,
    StructureViolated,
)
from .height import height, is_critical_group, xhat
from .scalar_matrix import MatrixK
from .symmetric_space import Automorphism, apply_sigma, model_defect, twist_automorphism
from .tolerances import TOL

# -- componentwise rectangular algebra ---------------------------------------
#
# Rectangular blocks (columns of U, V) are handled as component arrays:
# (n, m) real/complex arrays, or (n, m, 4) arrays of quaternion components.

_QMUL = np.zeros((4, 4, 4))
for (p, q, r, s) in [
    (0, 0, 0, 1), (1, 1, 0, -1), (2, 2, 0, -1), (3, 3, 0, -1),
    (0, 1, 1, 1), (1, 0, 1, 1), (2, 3, 1, 1), (3, 2, 1, -1),
    (0, 2, 2, 1), (2, 0, 2, 1), (3, 1, 2, 1), (1, 3, 2, -1),
    (0, 3, 3, 1), (3, 0, 3, 1), (1, 2, 3, 1), (2, 1, 3, -1),
]:
    _QMUL[p, q, r] = s


def _mm(field: str, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if field == "H":
        return np.einsum("ijp,jkq,pqr->ikr", A, B, _QMUL)
    return A @ B


def _ct(field: str, A: np.ndarray) -> np.ndarray:
    if field == "H":
        out = A.transpose(1, 0, 2).copy()
        out[..., 1:] *= -1
        return out
    return A.conj().T


def _to_matrix(field: str, comps: np.ndarray) -> MatrixK:
    if field == "H":
        return MatrixK.from_quaternion(comps)
    return MatrixK(field, comps)


def _phi(v: np.ndarray) -> np.ndarray:
    """Antiunitary partner of an adjoint column: ``[p; q] -> [-conj(q); conj(p)]``."""
    n = v.shape[0] // 2
    return np.concatenate([-v[n:].conj(), v[:n].conj()])


def _quaternion_basis(P: np.ndarray, m: int) -> np.ndarray:
    """Pick ``m`` columns ``u`` so that the ``u`` and ``phi(u)`` form an orthonormal
    basis of the (phi-invariant) span of ``P``; returned as (n, m, 4) components."""
    n = P.shape[0] // 2
    chosen: list[np.ndarray] = []
    cand = [P[:, k] for k in range(P.shape[1])]
    while len(chosen) < m:
        best, best_norm = None, -1.0
        for v in cand:
            w = v.copy()
            for u in chosen:
                w -= u * np.vdot(u, w)
                pu = _phi(u)
                w -= pu * np.vdot(pu, w)
            nw = np.linalg.norm(w)
            if nw > best_norm:
                best, best_norm = w, nw
        if best_norm < 1e-6:
            raise ArithmeticError("subspace is not quaternion-invariant")
        chosen.append(best / best_norm)
    F = np.stack(chosen, axis=1)
    a = F[:n]
    b = -F[n:].conj()
    return np.stack([a.real, a.imag, b.real, b.imag], axis=-1)


def _gauge_columns(field: str, U: np.ndarray) -> np.ndarray:
    """Right-multiply each column by a unit scalar so its first nonzero entry is real positive."""
    U = U.copy()
    for k in range(U.shape[1]):
        col = U[:, k]
        mags = np.linalg.norm(col, axis=-1) if field == "H" else np.abs(col)
        idx = int(np.argmax(mags > 1e-8 * max(mags.max(), 1e-300)))
        e = col[idx]
        if field == "H":
            c = e * np.array([1.0, -1.0, -1.0, -1.0]) / np.linalg.norm(e)
            U[:, k] = np.einsum("ip,q,pqr->ir", col, c, _QMUL)
        else:
            U[:, k] = col * (np.conj(e) / abs(e))
    return U


def _cluster(values: np.ndarray, gap: float) -> list[list[int]]:
    """Indices of ascending ``values`` grouped where consecutive gaps are below ``gap``."""
    groups: list[list[int]] = []
    for k, v in enumerate(values):
        if groups and v - values[groups[-1][-1]] <= gap:
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def structured_eigh(Hm: MatrixK, gap: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix over R, C or H.

    Returns ascending eigenvalues (n of them) and the eigenvectors as component
    columns, so that ``Hm = W diag(w) W*`` with W over the same field.
    """
    a = 0.5 * (Hm.a + Hm.a.conj().T)
    w, P = np.linalg.eigh(a)
    if Hm.field != "H":
        return w, P
    scale = max(np.max(np.abs(w)), 1e-300)
    gap = 1e-9 * scale if gap is None else gap
    vals, cols = [], []
    for grp in _cluster(w, gap):
        if len(grp) % 2:
            raise ArithmeticError("quaternion eigenvalues are not paired")
        m = len(grp) // 2
        cols.append(_quaternion_basis(P[:, grp], m))
        vals.extend([float(np.mean(w[grp]))] * m)
    return np.array(vals), np.concatenate(cols, axis=1)


# -- canonical SVD ---------------------------------------------------------


@dataclasses.dataclass
class CanonicalSVD:
    U: MatrixK
    D: MatrixK
    V: MatrixK
    block_sizes: tuple
    values: tuple
    singular_values: np.ndarray
    residual: float

    @property
    def n0(self) -> int:
        return self.block_sizes[0]


def _svd_subspaces(Y: MatrixK, gap: float):
    """Complex SVD of the complex form, grouped into canonical blocks (zero block first)."""
    P, s, Qh = np.linalg.svd(Y.a)
    order = np.argsort(s, kind="stable")
    s, P, Q = s[order], P[:, order], Qh.conj().T[:, order]
    smax = float(s[-1]) if len(s) else 0.0
    thresh = gap * smax
    zero = [k for k in range(len(s)) if s[k] <= thresh or smax == 0.0]
    pos = [k for k in range(len(s)) if k not in zero]
    groups = [zero] + [[pos[k] for k in g] for g in _cluster(s[pos], thresh)] if pos else [zero]
    return s, P, Q, groups


def svd_canonical(Y: MatrixK, gap: float | None = None) -> CanonicalSVD:
    """``Y = U D V*`` with ``D`` = zero block, then ascending repeated values."""
    gap = TOL.cluster_gap if gap is None else gap
    f, n = Y.field, Y.n
    mult = 2 if f == "H" else 1
    s, P, Q, groups = _svd_subspaces(Y, gap)
    Yc = Y.components()
    Yct = _ct(f, Yc)
    Ucols, Vcols, dvals, sizes, values = [], [], [], [], []
    for gi, grp in enumerate(groups):
        if len(grp) % mult:
            raise ArithmeticError("quaternion singular values are not paired")
        m = len(grp) // mult
        sizes.append(m)
        if m == 0:
            continue
        if f == "H":
            Ub = _quaternion_basis(P[:, grp], m)
        else:
            Ub = P[:, grp]
        Ub = _gauge_columns(f, Ub)
        if gi == 0:
            if f == "H":
                Vb = _quaternion_basis(Q[:, grp], m)
            else:
                Vb = Q[:, grp]
            Vb = _gauge_columns(f, Vb)
            t = 0.0
        else:
            t = float(np.mean(s[grp]))
            values.append(t)
            Vb = _mm(f, Yct, Ub) / t
            Vb = _orthonormalize(f, Vb)
        Ucols.append(Ub)
        Vcols.append(Vb)
        dvals.extend([t] * m)
    Uc = np.concatenate(Ucols, axis=1)
    Vc = np.concatenate(Vcols, axis=1)
    U, V = _to_matrix(f, Uc), _to_matrix(f, Vc)
    D = MatrixK.from_real_diag(f, dvals)
    res = (U @ D @ V.H - Y).norm()
    return CanonicalSVD(U, D, V, tuple(sizes), tuple(values), np.array(dvals), res)


def _orthonormalize(f: str, B: np.ndarray) -> np.ndarray:
    """Nearest matrix with orthonormal columns (polar factor), in components."""
    G = _mm(f, _ct(f, B), B)
    w, W = structured_eigh(_to_matrix(f, G))
    Wc = _ct(f, W)
    inv_sqrt = _mm(f, W * _bcast(f, 1.0 / np.sqrt(w)), Wc)
    return _mm(f, B, inv_sqrt)


def _bcast(f: str, d: np.ndarray) -> np.ndarray:
    return d[None, :, None] if f == "H" else d[None, :]


def diagonal_blocks(D: MatrixK, gap: float | None = None) -> tuple[int, list, list]:
    """Block data ``(n0, [t_1..t_k], [n_1..n_k])`` of a canonical diagonal matrix."""
    gap = TOL.cluster_gap if gap is None else gap
    d = np.real(np.diag(D.a))[: D.n]
    off = D.a - np.diag(np.diag(D.a))
    if np.linalg.norm(off) > 1e-9 * max(1.0, np.linalg.norm(D.a)) or np.any(np.abs(np.imag(np.diag(D.a))) > 1e-12):
        raise ValueError("not a real diagonal matrix")
    dmax = float(np.max(np.abs(d))) if len(d) else 0.0
    thresh = gap * dmax
    n0 = int(np.sum(np.abs(d) <= thresh)) if dmax > 0 else len(d)
    pos = d[n0:]
    if np.any(d[:n0] > thresh) or np.any(np.diff(d) < -thresh) or np.any(pos <= thresh):
        raise ValueError("diagonal is not in canonical order (zeros first, then ascending)")
    values, sizes = [], []
    for g in _cluster(pos, thresh):
        values.append(float(np.mean(pos[g])))
        sizes.append(len(g))
    return n0, values, sizes


# -- polar forms -----------------------------------------------------------


@dataclasses.dataclass
class PolarForm:
    S: MatrixK
    Omega: MatrixK
    side: str
    svd: CanonicalSVD | None = None

    def reconstruct(self) -> MatrixK:
        return self.S @ self.Omega if self.side == "left" else self.Omega @ self.S


def polar(Y: MatrixK, side: str = "left") -> PolarForm:
    """``Y = S Omega`` (left) or ``Y = Omega S'`` (right) from the canonical SVD."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    svd = svd_canonical(Y)
    Omega = svd.U @ svd.V.H
    if side == "left":
        S = svd.U @ svd.D @ svd.U.H
    else:
        S = svd.V @ svd.D @ svd.V.H
    return PolarForm(0.5 * (S + S.H), Omega, side, svd)


def polar_unitary_factor(Y: MatrixK) -> MatrixK:
    """Unitary polar factor ``U V*`` via the SVD of the complex form (structure preserving)."""
    u, _, vh = np.linalg.svd(Y.a)
    return MatrixK(Y.field, u @ vh)


def hermitian_min_eig(Hm: MatrixK) -> float:
    a = 0.5 * (Hm.a + Hm.a.conj().T)
    return float(np.linalg.eigvalsh(a)[0])


def hermitian_square_root_structure(Sigma: MatrixK, Y: MatrixK, tol: float | None = None) -> tuple[MatrixK, MatrixK]:
    """For a Hermitian square root ``Sigma`` of ``Y Y*``, return ``W, Delta`` with
    ``Sigma = W Delta W*`` and ``Delta`` a real diagonal differing from the canonical
    ``D`` only by signs (ordered by ``|Delta|`` ascending, negatives first in a block)."""
    tol = TOL.membership * max(1.0, Y.norm() ** 2) if tol is None else tol
    if (Sigma - Sigma.H).norm() > tol:
        raise NotSquareRoot("Sigma is not Hermitian")
    if (Sigma @ Sigma - Y @ Y.H).norm() > tol:
        raise NotSquareRoot("Sigma^2 != Y Y*")
    w, W = structured_eigh(Sigma)
    order = sorted(range(len(w)), key=lambda k: (abs(w[k]), w[k]))
    f = Sigma.field
    Wc = W[:, order]
    Wm = _to_matrix(f, Wc)
    Delta = MatrixK.from_real_diag(f, w[order])
    return Wm, Delta


def global_max_polar_test(Y: MatrixK, A: MatrixK, tol: float | None = None) -> bool:
    """True iff ``Y A`` is positive semidefinite at the group-critical point ``A``,
    i.e. iff ``A`` is a global maximum of ``h_Y`` on the group."""
    ok, r = is_critical_group(Y, A)
    if not ok:
        raise NotCritical(f"A is not critical for h_Y (residual {r:.3e})")
    Sigma = Y @ A
    tol = 1e-8 * max(1.0, Y.norm()) if tol is None else tol
    return hermitian_min_eig(Sigma) >= -tol


def global_max_value(Y: MatrixK) -> float:
    """``n_1 t_1 + ... + n_k t_k``, the maximum of ``h_Y`` over the group."""
    svd = svd_canonical(Y)
    return float(sum(t * m for t, m in zip(svd.values, svd.block_sizes[1:])))


# -- adapted decompositions ------------------------------------------------

EPSILONS = (1e-4, 1e-6, 1e-8)


@dataclasses.dataclass
class AdaptedDecomposition:
    S: MatrixK
    Omega: MatrixK
    side: str
    svd: CanonicalSVD
    residuals: dict
    epsilons: list = dataclasses.field(default_factory=list)
    epsilon_steps: list = dataclasses.field(default_factory=list)
    Theta: MatrixK | None = None

    @property
    def S_right(self) -> MatrixK:
        return self.Omega.H @ self.S @ self.Omega


def _check_hypotheses(sigma: Automorphism, Y: MatrixK, svd: CanonicalSVD):
    scale = max(1.0, Y.norm())
    r = (apply_sigma(sigma, Y) - Y.H).norm()
    if r > TOL.membership * scale:
        raise HypothesisViolated(f"sigma(Y) != Y* (residual {r:.3e})")
    sD = apply_sigma(sigma, svd.D)
    if (sD - sD.H).norm() > TOL.membership * scale or hermitian_min_eig(sD) < -TOL.membership * scale:
        raise HypothesisViolated("sigma(D) is not positive semidefinite")


def adapted_residuals(sigma: Automorphism, Y: MatrixK, S: MatrixK, Omega: MatrixK) -> dict:
    return {
        "reconstruction": (S @ Omega - Y).norm(),
        "sigma_Omega": (apply_sigma(sigma, Omega) - Omega.H).norm(),
        "sigma_S": (apply_sigma(sigma, S) - Omega.H @ S @ Omega).norm(),
        "S_min_eig": hermitian_min_eig(S),
        "Omega_unitary": (Omega @ Omega.H - MatrixK.identity(Y.field, Y.n)).norm(),
    }


def _singular_limit(Y: MatrixK, svd: CanonicalSVD, stab_tol: float):
    """Limit of the unitary polar factors of ``Y + eps I`` as ``eps -> 0``.

    The sequence ``EPSILONS`` is evaluated and the returned limit must agree
    with the smallest-eps factor to ``stab_tol``.  In the SVD basis
    the limit is ``U_+ V_+* + U_0 Q V_0*`` where ``Q`` is the unitary polar
    factor of ``U_0* V_0``; that exact form is returned when ``U_0* V_0`` is
    well conditioned, otherwise the kernel block of the last iterate is used.
    """
    I = MatrixK.identity(Y.field, Y.n)
    eps_used, omegas = [], []
    for eps in EPSILONS:
        Ye = Y + eps * I
        s = np.linalg.svd(Ye.a, compute_uv=False)
        if s[-1] <= TOL.singular * max(1.0, np.linalg.norm(Ye.a)):
            continue
        eps_used.append(eps)
        omegas.append(polar_unitary_factor(Ye))
    if len(omegas) < 2:
        raise NonConvergence("too few admissible epsilon values")
    steps = [(omegas[k + 1] - omegas[k]).norm() for k in range(len(omegas) - 1)]

    f, n0 = Y.field, svd.n0
    Uc, Vc = svd.U.components(), svd.V.components()
    U0, V0 = Uc[:, :n0], Vc[:, :n0]
    Up, Vp = Uc[:, n0:], Vc[:, n0:]
    T00 = _mm(f, _ct(f, U0), V0)
    smin = float(np.linalg.svd(_to_matrix(f, T00).a, compute_uv=False)[-1])
    if smin > 1e-6:
        Q = polar_unitary_factor(_to_matrix(f, T00)).components()
    else:
        K = _mm(f, _mm(f, _ct(f, U0), omegas[-1].components()), V0)
        Q = polar_unitary_factor(_to_matrix(f, K)).components()
    Om = _mm(f, Up, _ct(f, Vp)) + _mm(f, _mm(f, U0, Q), _ct(f, V0))
    Omega = _to_matrix(f, Om)
    gap = (omegas[-1] - Omega).norm()
    if gap >= stab_tol:
        raise NonConvergence(f"limit differs from the smallest-eps factor by {gap:.3e}")
    return Omega, eps_used, steps, gap


def adapted_polar(sigma: Automorphism, Y: MatrixK, side: str = "left", stab_tol: float = 1e-6) -> AdaptedDecomposition:
    """Polar decomposition ``Y = S Omega`` with ``sigma(Omega) = Omega*`` and
    ``sigma(S) = Omega* S Omega``.  Requires ``sigma(Y) = Y*`` and ``sigma(D) >= 0``.

    ``side="right"`` returns ``Y = Omega S'`` with ``S' = Omega* S Omega``, which
    satisfies ``sigma(S') = Omega S' Omega*``.
    """
    svd = svd_canonical(Y)
    _check_hypotheses(sigma, Y, svd)
    S = svd.U @ svd.D @ svd.U.H
    S = 0.5 * (S + S.H)
    eps_used, steps, gap = [], [], 0.0
    if svd.n0 == 0:
        Omega = svd.U @ svd.V.H
    else:
        Omega, eps_used, steps, gap = _singular_limit(Y, svd, stab_tol)
    res = adapted_residuals(sigma, Y, S, Omega)
    res["limit_gap"] = gap
    if side == "right":
        Sr = Omega.H @ S @ Omega
        Sr = 0.5 * (Sr + Sr.H)
        res["sigma_S_right"] = (apply_sigma(sigma, Sr) - Omega @ Sr @ Omega.H).norm()
        return AdaptedDecomposition(Sr, Omega, "right", svd, res, eps_used, steps)
    return AdaptedDecomposition(S, Omega, "left", svd, res, eps_used, steps)


def adapted_svd(sigma: Automorphism, Y: MatrixK, stab_tol: float = 1e-6) -> AdaptedDecomposition:
    """SVD ``Y = U D V*`` whose ``Theta = U* sigma(V)`` satisfies ``sigma(Theta) = Theta*``.

    Built from the adapted polar form: ``S = U D U*`` and ``V = Omega* U``.
    The returned object carries the new SVD in ``.svd`` and ``Theta``.
    """
    dec = adapted_polar(sigma, Y, "left", stab_tol)
    U, D = dec.svd.U, dec.svd.D
    V = dec.Omega.H @ U
    Theta = U.H @ apply_sigma(sigma, V)
    res = dict(dec.residuals)
    res["svd_reconstruction"] = (U @ D @ V.H - Y).norm()
    res["sigma_Theta"] = (apply_sigma(sigma, Theta) - Theta.H).norm()
    svd = CanonicalSVD(U, D, V, dec.svd.block_sizes, dec.svd.values, dec.svd.singular_values, res["svd_reconstruction"])
    return AdaptedDecomposition(dec.S, dec.Omega, "left", svd, res, dec.epsilons, dec.epsilon_steps, Theta)


# -- reduction to the diagonal case ----------------------------------------


@dataclasses.dataclass
class Reduction:
    sigma: Automorphism
    sigma_prime: Automorphism
    X: MatrixK
    D: MatrixK
    U: MatrixK
    V: MatrixK
    Theta: MatrixK
    decomposition: AdaptedDecomposition

    def to_diagonal(self, A: MatrixK) -> MatrixK:
        """``A -> U* A V``."""
        return self.U.H @ A @ self.V

    def from_diagonal(self, B: MatrixK) -> MatrixK:
        """``B -> U B V*``."""
        return self.U @ B @ self.V.H


def reduce_to_diagonal(sigma: Automorphism, X: MatrixK, stab_tol: float = 1e-6) -> Reduction:
    """Reduce ``h_X`` on the model of ``sigma`` to ``h_D`` on the model of
    ``sigma'(Z) = Theta sigma(Z) Theta*``, using an adapted SVD ``Xhat = U D V*``.

    Critical points correspond under ``A -> U* A V`` (assuming the model is all of N).
    """
    Xh = xhat(sigma, X)
    dec = adapted_svd(sigma, Xh, stab_tol)
    U, D, V, Theta = dec.svd.U, dec.svd.D, dec.svd.V, dec.Theta
    sp = twist_automorphism(sigma, Theta, tol=max(TOL.membership, 1e-8) * max(1.0, Xh.norm()))
    r = (apply_sigma(sp, D) - D).norm()
    if r > 1e-8 * max(1.0, D.norm()):
        raise HypothesisViolated(f"sigma'(D) != D (residual {r:.3e})")
    return Reduction(sigma, sp, X, D, U, V, Theta, dec)


def diagonal_critical_points(sigma_prime: Automorphism | None, D: MatrixK, tol: float | None = None) -> list[MatrixK]:
    """Sign-diagonal critical points ``diag(+-1)`` of ``h_D`` lying in the model of ``sigma'``.

    These are all the critical points when every block of ``D`` has size one and
    there is no zero block; otherwise they are one representative per sign pattern.
    """
    tol = TOL.membership if tol is None else tol
    n, f = D.n, D.field
    out = []
    for signs in itertools.product((1.0, -1.0), repeat=n):
        B = MatrixK.from_real_diag(f, signs)
        if model_defect(sigma_prime, B) <= tol:
            out.append(B)
    return out


@dataclasses.dataclass
class CriticalBlockStructure:
    block_sizes: tuple
    values: tuple
    blocks: list
    signatures: list
    sign_traces: list
    off_block_mass: float
    block_residuals: list
    critical_value: float
    height_value: float


def critical_blocks_diagonal(D, A: MatrixK, tol: float | None = None) -> CriticalBlockStructure:
    """Block structure of a critical point of ``h_D`` on the group.

    The zero block of ``A`` must be unitary and each positive block a Hermitian
    involution; ``signatures`` lists ``(#(+1), #(-1))`` eigenvalues per block.
    """
    if isinstance(D, CanonicalSVD):
        D = D.D
    tol = 1e-8 if tol is None else tol
    n0, values, sizes = diagonal_blocks(D)
    all_sizes = [n0] + sizes
    f = A.field
    comps = A.components()
    starts = np.cumsum([0] + all_sizes)
    mask = np.zeros((A.n, A.n), dtype=bool)
    for a, b in zip(starts[:-1], starts[1:]):
        mask[a:b, a:b] = True
    off = comps.copy()
    off[mask] = 0
    off_mass = float(np.linalg.norm(off))
    if off_mass > tol:
        raise StructureViolated(f"off-block mass {off_mass:.3e}")
    blocks, sigs, traces, bres = [], [], [], []
    for bi, (a, b) in enumerate(zip(starts[:-1], starts[1:])):
        if b == a:
            blocks.append(None)
            sigs.append((0, 0))
            traces.append(0)
            bres.append(0.0)
            continue
        Ab = _to_matrix(f, comps[a:b, a:b])
        I = MatrixK.identity(f, b - a)
        if bi == 0:
            r = (Ab @ Ab.H - I).norm()
            blocks.append(Ab)
            sigs.append((0, 0))
            traces.append(0)
            bres.append(r)
        else:
            r = max((Ab - Ab.H).norm(), (Ab @ Ab - I).norm())
            w, _ = structured_eigh(Ab)
            p = int(np.sum(w > 0))
            m = int(np.sum(w < 0))
            blocks.append(Ab)
            sigs.append((p, m))
            traces.append(p - m)
            bres.append(r)
        if r > tol:
            raise StructureViolated(f"block {bi} fails its structure (residual {r:.3e})")
    cv = float(sum(t * tr for t, tr in zip(values, traces[1:])))
    return CriticalBlockStructure(
        tuple(all_sizes), tuple(values), blocks, sigs, traces, off_mass, bres, cv, height(D, A)
    )


def is_morse_group(X: MatrixK) -> tuple[bool, str]:
    svd = svd_canonical(X)
    n0, sizes = svd.block_sizes[0], svd.block_sizes[1:]
    if n0 > 0:
        return False, f"{n0} zero singular value(s)"
    if any(m > 1 for m in sizes):
        return False, f"repeated singular values, block sizes {list(sizes)}"
    return True, "singular values positive and pairwise distinct"


def is_morse(sigma_or_group: Automorphism | None, X: MatrixK, mode: str = "group", oracle_cfg=None, records=None) -> tuple[bool, str]:
    """Morse test: from singular values alone in group mode, from Hessian kernels
    at oracle-found critical points in model mode (an empirical verdict)."""
    if mode == "group":
        return is_morse_group(X)
    from .oracle import OracleConfig, oracle_critical_set

    if records is None:
        records = oracle_critical_set(sigma_or_group, X, mode="model", cfg=oracle_cfg or OracleConfig())
    degenerate = [r for r in records if r.kernel_dim > 0]
    if degenerate:
        return False, f"{len(degenerate)} of {len(records)} critical points have a Hessian kernel (empirical)"
    return True, f"all {len(records)} critical points found are non-degenerate (empirical)"


# -- serialization -----------------------------------------------------------


def _mj(M):
    from .scalar_matrix import matrix_to_json

    return None if M is None else matrix_to_json(M)


def decomposition_to_json(obj) -> dict:
    """Decomposition JSON for a CanonicalSVD, PolarForm or AdaptedDecomposition."""
    out = {k: None for k in ("U", "D", "V", "S", "Omega", "Theta")}
    if isinstance(obj, CanonicalSVD):
        svd = obj
        residuals = {"reconstruction": float(obj.residual)}
    elif isinstance(obj, PolarForm):
        svd = obj.svd
        out["S"], out["Omega"] = _mj(obj.S), _mj(obj.Omega)
        residuals = {"reconstruction": float((obj.reconstruct() - svd.U @ svd.D @ svd.V.H).norm())}
    else:
        svd = obj.svd
        out["S"], out["Omega"], out["Theta"] = _mj(obj.S), _mj(obj.Omega), _mj(obj.Theta)
        residuals = {k: float(v) for k, v in obj.residuals.items()}
        if obj.epsilon_steps:
            residuals["epsilon_steps"] = [float(x) for x in obj.epsilon_steps]
    out["U"], out["D"], out["V"] = _mj(svd.U), _mj(svd.D), _mj(svd.V)
    out["block_sizes"] = [int(x) for x in svd.block_sizes]
    out["values"] = [float(x) for x in svd.values]
    out["residuals"] = residuals
    return out


def reduction_to_json(red: Reduction) -> dict:
    out = decomposition_to_json(red.decomposition)
    out["sigma_prime"] = red.sigma_prime.to_json()
    out["critical_points"] = [
        _mj(red.from_diagonal(B)) for B in diagonal_critical_points(red.sigma_prime, red.D)
    ]
    return out
