"""Dense square matrices over the reals, complex numbers and quaternions.

Every matrix is stored in "complex form": real matrices as a float array,
complex matrices as a complex array, and quaternion matrices as their
2n x 2n complex adjoint.  The adjoint is a ring homomorphism compatible with
the conjugate transpose, so products, inverses and analytic functions of
quaternion matrices reduce to ordinary numpy calls on the adjoint.

A quaternion ``w + x i + y j + z k`` is split as ``a + b j`` with
``a = w + x i`` and ``b = y + z i``; an n x n quaternion matrix ``A1 + A2 j``
has adjoint ``[[A1, A2], [-conj(A2), conj(A1)]]``.
"""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from .errors import FieldMismatch, NonConvergence, SingularMatrix
from .tolerances import TOL

FIELDS = ("R", "C", "H")

_REAL_DIM = {"R": 1, "C": 2, "H": 4}


def quat_to_adjoint(q: np.ndarray) -> np.ndarray:
    """Map an (n, n, 4) array of quaternion components to its complex adjoint."""
    q = np.asarray(q, dtype=float)
    a = q[..., 0] + 1j * q[..., 1]
    b = q[..., 2] + 1j * q[..., 3]
    return np.block([[a, b], [-b.conj(), a.conj()]])


def adjoint_to_quat(c: np.ndarray) -> np.ndarray:
    """Inverse of :func:`quat_to_adjoint`; averages the redundant blocks."""
    n = c.shape[-1] // 2
    a = 0.5 * (c[..., :n, :n] + c[..., n:, n:].conj())
    b = 0.5 * (c[..., :n, n:] - c[..., n:, :n].conj())
    return np.stack([a.real, a.imag, b.real, b.imag], axis=-1)


class MatrixK:
    """An n x n matrix over one of the fields R, C or H.

    ``a`` holds the complex form described in the module docstring.  Instances
    are treated as immutable; every operation returns a new matrix.
    """

    __slots__ = ("field", "a")

    def __init__(self, field: str, a: np.ndarray):
        if field not in FIELDS:
            raise ValueError(f"unknown field {field!r}")
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square array, got shape {a.shape}")
        if field == "R":
            if np.iscomplexobj(a):
                if np.any(a.imag != 0):
                    raise ValueError("real matrix with nonzero imaginary part")
                a = a.real
            a = a.astype(float)
        else:
            a = a.astype(complex)
        if field == "H" and a.shape[0] % 2:
            raise ValueError("quaternion adjoint must have even size")
        self.field = field
        self.a = a

    # -- construction -----------------------------------------------------

    @classmethod
    def identity(cls, field: str, n: int) -> "MatrixK":
        return cls(field, np.eye(2 * n if field == "H" else n))

    @classmethod
    def zeros(cls, field: str, n: int) -> "MatrixK":
        return cls(field, np.zeros((2 * n, 2 * n) if field == "H" else (n, n)))

    @classmethod
    def from_quaternion(cls, q) -> "MatrixK":
        """Build from an (n, n, 4) array of (w, x, y, z) components."""
        q = np.asarray(q, dtype=float)
        if q.ndim == 1:
            q = q.reshape(1, 1, 4)
        return cls("H", quat_to_adjoint(q))

    @classmethod
    def quaternion(cls, w=0.0, x=0.0, y=0.0, z=0.0) -> "MatrixK":
        """1 x 1 quaternion matrix ``w + x i + y j + z k``."""
        return cls.from_quaternion([w, x, y, z])

    @classmethod
    def diag(cls, field: str, entries: Sequence) -> "MatrixK":
        """Diagonal matrix; quaternion entries are 4-sequences."""
        n = len(entries)
        if field == "H":
            q = np.zeros((n, n, 4))
            for i, e in enumerate(entries):
                q[i, i] = _as_quat(e)
            return cls.from_quaternion(q)
        return cls(field, np.diag(np.asarray(entries, dtype=complex if field == "C" else float)))

    @classmethod
    def from_real_diag(cls, field: str, values: Sequence[float]) -> "MatrixK":
        d = np.asarray(values, dtype=float)
        if field == "H":
            d = np.concatenate([d, d])
        return cls(field, np.diag(d))

    # -- shape and access -------------------------------------------------

    @property
    def n(self) -> int:
        m = self.a.shape[0]
        return m // 2 if self.field == "H" else m

    @property
    def real_dim(self) -> int:
        """Dimension of the ambient matrix space as a real vector space."""
        return _REAL_DIM[self.field] * self.n * self.n

    def components(self) -> np.ndarray:
        """Entries as a real (n, n) array (R), complex (n, n) array (C), or (n, n, 4) array (H)."""
        if self.field == "H":
            return adjoint_to_quat(self.a)
        return self.a.copy()

    def block(self, rows: slice, cols: slice) -> "MatrixK":
        """Square sub-block by quaternion-level index ranges."""
        if self.field != "H":
            return MatrixK(self.field, self.a[rows, cols])
        return MatrixK.from_quaternion(self.components()[rows, cols])

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "MatrixK") -> None:
        if not isinstance(other, MatrixK):
            raise TypeError(f"expected MatrixK, got {type(other).__name__}")
        if other.field != self.field or other.a.shape != self.a.shape:
            raise FieldMismatch(
                f"{self.field}{self.n}x{self.n} vs {other.field}{other.n}x{other.n}"
            )

    def __matmul__(self, other: "MatrixK") -> "MatrixK":
        self._check(other)
        return MatrixK(self.field, self.a @ other.a)

    def __add__(self, other: "MatrixK") -> "MatrixK":
        self._check(other)
        return MatrixK(self.field, self.a + other.a)

    def __sub__(self, other: "MatrixK") -> "MatrixK":
        self._check(other)
        return MatrixK(self.field, self.a - other.a)

    def __neg__(self) -> "MatrixK":
        return MatrixK(self.field, -self.a)

    def __mul__(self, s: float) -> "MatrixK":
        if isinstance(s, MatrixK):
            raise TypeError("use @ for matrix products")
        if np.iscomplexobj(s) and self.field != "C":
            raise FieldMismatch("complex scalar on a non-complex matrix")
        return MatrixK(self.field, self.a * s)

    __rmul__ = __mul__

    def __truediv__(self, s: float) -> "MatrixK":
        return self * (1.0 / s)

    @property
    def H(self) -> "MatrixK":
        return conj_transpose(self)

    def norm(self) -> float:
        """Frobenius norm, ``sqrt(<A, A>)``."""
        return float(np.sqrt(re_trace_inner(self, self)))

    def re_trace(self) -> float:
        t = float(np.trace(self.a).real)
        return 0.5 * t if self.field == "H" else t

    def allclose(self, other: "MatrixK", tol: float = 1e-9) -> bool:
        return (self - other).norm() <= tol

    def __repr__(self) -> str:
        return f"MatrixK({self.field!r}, n={self.n},\n{np.array2string(self.components(), precision=6)})"


def _as_quat(e) -> np.ndarray:
    e = np.asarray(e, dtype=float)
    if e.shape == ():
        return np.array([float(e), 0.0, 0.0, 0.0])
    return e


def conj_transpose(A: MatrixK) -> MatrixK:
    return MatrixK(A.field, A.a.conj().T)


def re_trace_inner(X: MatrixK, Y: MatrixK) -> float:
    """Real inner product ``Re Tr(X* Y)``."""
    X._check(Y)
    v = float(np.vdot(X.a, Y.a).real)
    return 0.5 * v if X.field == "H" else v


def frob(A: MatrixK) -> float:
    return A.norm()


def smallest_singular_value(A: MatrixK) -> float:
    return float(np.linalg.svd(A.a, compute_uv=False)[-1])


def mat_inverse(A: MatrixK, rel_tol: float | None = None) -> MatrixK:
    """Inverse; raises SingularMatrix below the singularity threshold."""
    rel = TOL.singular if rel_tol is None else rel_tol
    s = np.linalg.svd(A.a, compute_uv=False)
    scale = max(np.linalg.norm(A.a), np.finfo(float).tiny)
    if s[-1] < rel * scale:
        raise SingularMatrix(f"smallest singular value {s[-1]:.3e} below {rel:.1e}*|A|")
    return MatrixK(A.field, np.linalg.inv(A.a))


def solve_right(B: MatrixK, A: MatrixK) -> MatrixK:
    """``B A^{-1}`` without forming the inverse explicitly."""
    B._check(A)
    s = np.linalg.svd(A.a, compute_uv=False)
    if s[-1] < TOL.singular * max(np.linalg.norm(A.a), np.finfo(float).tiny):
        raise SingularMatrix(f"smallest singular value {s[-1]:.3e}")
    return MatrixK(A.field, np.linalg.solve(A.a.T, B.a.T).T)


def expm_array(a: np.ndarray, max_terms: int = 60) -> np.ndarray:
    """Matrix exponential by scaling and squaring of a truncated Taylor series."""
    norm1 = np.linalg.norm(a, 1)
    squarings = 0
    if norm1 > 0.5:
        squarings = int(np.ceil(np.log2(norm1 / 0.5)))
    b = a / (2.0 ** squarings)
    result = np.eye(a.shape[0], dtype=a.dtype)
    term = np.eye(a.shape[0], dtype=a.dtype)
    for k in range(1, max_terms + 1):
        term = term @ b / k
        result = result + term
        if np.linalg.norm(term, 1) <= TOL.series * np.linalg.norm(result, 1):
            break
    else:
        raise NonConvergence(f"exponential series did not converge in {max_terms} terms")
    for _ in range(squarings):
        result = result @ result
    return result


def mat_analytic(A: MatrixK, f: str) -> MatrixK:
    """``exp``, ``sinh`` or ``cosh`` of a square matrix."""
    if f == "exp":
        return MatrixK(A.field, expm_array(A.a))
    if f not in ("sinh", "cosh"):
        raise ValueError(f"unsupported function {f!r}")
    ep = expm_array(A.a)
    em = expm_array(-A.a)
    return MatrixK(A.field, 0.5 * (ep - em) if f == "sinh" else 0.5 * (ep + em))


def sinh_cosh(A: MatrixK) -> tuple[MatrixK, MatrixK]:
    ep = expm_array(A.a)
    em = expm_array(-A.a)
    return MatrixK(A.field, 0.5 * (ep - em)), MatrixK(A.field, 0.5 * (ep + em))


def complex_adjoint(A: MatrixK) -> MatrixK:
    """The 2n x 2n complex matrix representing a quaternion matrix."""
    if A.field != "H":
        raise FieldMismatch("complex_adjoint expects a quaternion matrix")
    return MatrixK("C", A.a.copy())


def from_complex_adjoint(C: MatrixK) -> MatrixK:
    if C.field != "C" or C.a.shape[0] % 2:
        raise FieldMismatch("expected a complex matrix of even size")
    return MatrixK.from_quaternion(adjoint_to_quat(C.a))


# -- real coordinates ------------------------------------------------------
#
# The map below is an isometry from (K^{n x n}, Re Tr(X* Y)) onto R^d, so
# null spaces and orthonormal bases computed in R^d are orthonormal for the
# matrix inner product.


def to_real(A: MatrixK) -> np.ndarray:
    if A.field == "R":
        return A.a.ravel().copy()
    if A.field == "C":
        return np.concatenate([A.a.real.ravel(), A.a.imag.ravel()])
    return adjoint_to_quat(A.a).transpose(2, 0, 1).ravel()


def from_real(field: str, n: int, v: np.ndarray) -> MatrixK:
    v = np.asarray(v, dtype=float)
    if field == "R":
        return MatrixK("R", v.reshape(n, n))
    if field == "C":
        return MatrixK("C", v[: n * n].reshape(n, n) + 1j * v[n * n:].reshape(n, n))
    return MatrixK.from_quaternion(v.reshape(4, n, n).transpose(1, 2, 0))


def real_basis(field: str, n: int) -> list[MatrixK]:
    d = _REAL_DIM[field] * n * n
    eye = np.eye(d)
    return [from_real(field, n, eye[k]) for k in range(d)]


# -- JSON ------------------------------------------------------------------


def matrix_to_json(A: MatrixK) -> dict:
    comps = A.components()
    if A.field == "R":
        rows = [[float(x) for x in row] for row in comps]
    elif A.field == "C":
        rows = [[[float(x.real), float(x.imag)] for x in row] for row in comps]
    else:
        rows = [[[float(c) for c in q] for q in row] for row in comps]
    return {"field": A.field, "n": A.n, "rows": rows}


def matrix_from_json(obj) -> MatrixK:
    if isinstance(obj, str):
        obj = json.loads(obj)
    field = obj["field"]
    n = int(obj["n"])
    rows = obj["rows"]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"rows do not form a {n}x{n} matrix")
    if field == "R":
        return MatrixK("R", np.array(rows, dtype=float))
    if field == "C":
        arr = np.array(rows, dtype=float).reshape(n, n, 2)
        return MatrixK("C", arr[..., 0] + 1j * arr[..., 1])
    if field == "H":
        return MatrixK.from_quaternion(np.array(rows, dtype=float).reshape(n, n, 4))
    raise ValueError(f"unknown field {field!r}")


def load_matrix(path: str) -> MatrixK:
    with open(path) as fh:
        return matrix_from_json(json.load(fh))
