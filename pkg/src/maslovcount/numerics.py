"""Small dense complex linear algebra used throughout the package.

The matrices involved are tiny (state dimension ``2n`` with ``n`` a handful at
most), so everything is delegated to LAPACK through numpy and scipy. The
functions here add the input contracts and the conventions that the rest of
the package relies on (ascending eigenvalues, phases in ``(-pi, pi]``, …).
"""

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .config import DEFAULT_TOLERANCES
from .errors import ContractViolation, SingularMatrix

CArray = NDArray[np.complex128]


def symplectic_j(n: int) -> NDArray[np.float64]:
    """Return the standard symplectic matrix ``[[0, -I], [I, 0]]`` of size ``2n``."""
    if n < 1:
        raise ContractViolation(f"block dimension must be positive, got {n}")
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def as_cmatrix(m: ArrayLike, name: str = "matrix") -> CArray:
    """Convert to a finite 2-D complex array, raising on NaN or Inf entries."""
    arr = np.array(m, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ContractViolation(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation(f"{name} has non-finite entries")
    return arr


def _require_square(m: CArray, name: str) -> None:
    if m.shape[0] != m.shape[1]:
        raise ContractViolation(f"{name} must be square, got shape {m.shape}")


def hermitian_eig(m: ArrayLike, tol: float = DEFAULT_TOLERANCES.hermitian) -> tuple[NDArray[np.float64], CArray]:
    """Eigen-decomposition of a Hermitian matrix.

    Args:
        m: Square matrix with ``‖M - M*‖∞ <= tol·‖M‖∞``.
        tol: Relative Hermiticity tolerance.

    Returns:
        Ascending real eigenvalues and a unitary matrix of column eigenvectors.
    """
    a = as_cmatrix(m)
    _require_square(a, "hermitian_eig input")
    scale = np.abs(a).sum(axis=1).max() if a.size else 0.0
    defect = np.abs(a - a.conj().T).sum(axis=1).max() if a.size else 0.0
    if defect > tol * max(scale, np.finfo(float).tiny):
        raise ContractViolation(f"matrix is not Hermitian (defect {defect:.3e}, scale {scale:.3e})")
    values, vectors = np.linalg.eigh(0.5 * (a + a.conj().T))
    return values, vectors


def unitary_eig(u: ArrayLike, tol: float = DEFAULT_TOLERANCES.unitary) -> tuple[NDArray[np.float64], CArray]:
    """Eigenphases and orthonormal eigenvectors of a unitary matrix.

    A unitary matrix is normal, so its complex Schur form is diagonal and the
    Schur vectors are eigenvectors.

    Returns:
        Phases in ``(-pi, pi]`` (not sorted) and the matching eigenvectors.
    """
    a = as_cmatrix(u)
    _require_square(a, "unitary_eig input")
    defect = np.abs(a.conj().T @ a - np.eye(a.shape[0])).max() if a.size else 0.0
    if defect > tol:
        raise ContractViolation(f"matrix is not unitary (defect {defect:.3e})")
    if a.shape[0] == 1:
        phases = np.angle(a[0:1, 0])
        vectors = np.ones((1, 1), dtype=complex)
    else:
        t, z = scipy.linalg.schur(a, output="complex")
        phases = np.angle(np.diag(t))
        vectors = z
    phases = np.where(phases <= -np.pi, np.pi, phases)
    return phases, vectors


def unitary_eigphases(u: ArrayLike, tol: float = DEFAULT_TOLERANCES.unitary) -> NDArray[np.float64]:
    """Eigenphases in ``(-pi, pi]`` of a unitary matrix, sorted ascending."""
    phases, _ = unitary_eig(u, tol)
    return np.sort(phases)


def solve(a: ArrayLike, b: ArrayLike, rcond_min: float = DEFAULT_TOLERANCES.rcond_min) -> CArray:
    """Solve ``A X = B`` for square nonsingular ``A``.

    Raises:
        SingularMatrix: when the reciprocal 1-norm condition number of ``A`` is
            below ``rcond_min``; the estimate is attached as evidence.
    """
    am = as_cmatrix(a, "A")
    bm = np.array(b, dtype=complex)
    _require_square(am, "A")
    if bm.shape[0] != am.shape[0]:
        raise ContractViolation(f"incompatible shapes {am.shape} and {bm.shape}")
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(am, 1)
    rcond = 0.0 if not np.isfinite(cond) else 1.0 / cond
    if rcond < rcond_min:
        raise SingularMatrix(f"matrix is singular to working precision (rcond {rcond:.3e})", rcond=rcond)
    return np.linalg.solve(am, bm)


def kernel_dim(m: ArrayLike, tol: float, scale: float | None = None) -> int:
    """Number of singular values of ``M`` below ``tol`` times a reference scale.

    Args:
        m: Any matrix.
        tol: Positive relative threshold.
        scale: Reference magnitude. By default the largest singular value is
            used (or 1 when ``M`` vanishes). Passing ``scale=1`` gives an
            absolute threshold, which is the right choice for products of
            orthonormal frames.
    """
    if tol <= 0:
        raise ContractViolation("tol must be positive")
    a = np.array(m, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    # Count missing rank as kernel too: an n×k matrix with k > n has k - n extra.
    sv = np.linalg.svd(a, compute_uv=False)
    if scale is None:
        scale = sv[0] if sv.size and sv[0] > 0 else 1.0
    return int(np.sum(sv < tol * scale)) + max(0, a.shape[1] - sv.size)


def orthonormalize(f: ArrayLike) -> CArray:
    """Orthonormal basis of the column span from a thin QR factorization.

    The factorization is normalized so that ``R`` has a positive real
    diagonal. That makes ``Q`` unique and continuous in ``F``, so a sampled
    path of frames stays continuous after orthonormalization.
    """
    q, r = np.linalg.qr(np.asarray(f, dtype=complex))
    d = np.diag(r).copy()
    mag = np.abs(d)
    d = np.where(mag > 0, d / np.where(mag > 0, mag, 1.0), 1.0)
    return q * d


def normalize_phase(v: ArrayLike) -> CArray:
    """Scale a vector to unit length with its largest-magnitude entry real positive."""
    w = np.asarray(v, dtype=complex).ravel()
    norm = np.linalg.norm(w)
    if norm == 0:
        raise ContractViolation("cannot normalize the zero vector")
    k = int(np.argmax(np.abs(w)))
    return w * (np.abs(w[k]) / w[k]) / norm


def subspace_angle(f1: ArrayLike, f2: ArrayLike) -> float:
    """Largest principal angle between the column spans of two matrices."""
    return float(np.max(scipy.linalg.subspace_angles(np.asarray(f1, dtype=complex), np.asarray(f2, dtype=complex))))
