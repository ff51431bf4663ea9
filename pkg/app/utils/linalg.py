"""Tolerance-aware dense linear algebra on float64 numpy arrays.

All rank decisions go through ``Tolerance.cutoff``: a singular value counts
as zero when it does not exceed max(rel * max(rows, cols) * s_max, floor).
"""
from typing import Optional

import numpy as np
from scipy import linalg as sla

from app.exceptions import DimensionMismatch, NonFiniteMatrix, NotOrthonormal
from app.models.riccati import Tolerance

DEFAULT_TOL = Tolerance()


def as_matrix(data, rows: Optional[int] = None, cols: Optional[int] = None,
              name: str = "matrix") -> np.ndarray:
    """Coerce nested sequences or scalars to a finite 2-D float array"""
    arr = np.array(data, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.size == 0 and rows is not None and cols is not None:
        return np.zeros((rows, cols))
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {arr.shape}")
    if rows is not None and arr.shape[0] != rows:
        raise DimensionMismatch(f"{name} has {arr.shape[0]} rows, expected {rows}")
    if cols is not None and arr.shape[1] != cols:
        raise DimensionMismatch(f"{name} has {arr.shape[1]} columns, expected {cols}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteMatrix(f"{name} contains NaN or infinite entries")
    return arr


def max_norm(M: np.ndarray) -> float:
    """Largest absolute entry; 0 for an empty matrix"""
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M)))


def singular_values(M: np.ndarray) -> np.ndarray:
    """Singular values in decreasing order"""
    if M.size == 0:
        return np.zeros(0)
    return sla.svd(M, compute_uv=False)


def rank(M: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> int:
    """Number of singular values above the tolerance cutoff"""
    s = singular_values(M)
    return int(np.sum(s > tol.cutoff(s, M.shape)))


def orient_columns(K: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-magnitude entry of each column is positive"""
    if K.size == 0:
        return K
    idx = np.argmax(np.abs(K), axis=0)
    signs = np.sign(K[idx, np.arange(K.shape[1])])
    signs[signs == 0] = 1.0
    return K * signs


def pinv(M: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse through the SVD"""
    rows, cols = M.shape
    if M.size == 0:
        return np.zeros((cols, rows))
    U, s, Vt = sla.svd(M, full_matrices=False)
    r = int(np.sum(s > tol.cutoff(s, M.shape)))
    if r == 0:
        return np.zeros((cols, rows))
    return (Vt[:r].T / s[:r]) @ U[:, :r].T


def kernel_basis(M: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of ker M, one column per kernel direction"""
    rows, cols = M.shape
    if cols == 0:
        return np.zeros((0, 0))
    if rows == 0:
        return np.eye(cols)
    _, s, Vt = sla.svd(M, full_matrices=True)
    r = int(np.sum(s > tol.cutoff(s, M.shape)))
    return orient_columns(Vt[r:].T.copy())


def image_basis(M: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of im M"""
    rows, cols = M.shape
    if M.size == 0:
        return np.zeros((rows, 0))
    U, s, _ = sla.svd(M, full_matrices=False)
    r = int(np.sum(s > tol.cutoff(s, M.shape)))
    return orient_columns(U[:, :r].copy())


def is_orthonormal(W: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Columns of W are orthonormal"""
    k = W.shape[1]
    return max_norm(W.T @ W - np.eye(k)) <= tol.abs_residual


def is_orthogonal(T: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    """T is square with orthonormal columns"""
    return T.shape[0] == T.shape[1] and is_orthonormal(T, tol)


def orthonormal_extension(W: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Complete orthonormal columns W to a square orthogonal [W1 | W].

    The columns of W are kept, unchanged, as the trailing block.
    """
    n, k = W.shape
    if k > n:
        raise DimensionMismatch(f"cannot extend {k} columns in dimension {n}")
    if not is_orthonormal(W, tol):
        raise NotOrthonormal("input columns are not orthonormal")
    if k == 0:
        return np.eye(n)
    complement = kernel_basis(W.T, tol)
    # rank of Wᵀ is k, so the complement has exactly n - k columns
    return np.hstack([complement[:, :n - k], W])


def ker_included(A: np.ndarray, B: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    """ker A ⊆ ker B, tested as B (I - A†A) = 0"""
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(
            f"column counts differ: {A.shape[1]} vs {B.shape[1]}"
        )
    projector = np.eye(A.shape[1]) - pinv(A, tol) @ A
    return max_norm(B @ projector) <= tol.abs_residual


def is_square(M: np.ndarray) -> bool:
    """Two-dimensional with as many rows as columns"""
    return M.ndim == 2 and M.shape[0] == M.shape[1]


def is_symmetric(M: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    return is_square(M) and max_norm(M - M.T) <= tol.abs_residual


def symmetrize(M: np.ndarray) -> np.ndarray:
    """Symmetric part (M + Mᵀ)/2"""
    return (M + M.T) / 2.0


def min_eigenvalue(M: np.ndarray) -> float:
    if not is_square(M):
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if M.size == 0:
        return 0.0
    return float(sla.eigvalsh(symmetrize(M))[0])


def is_psd(M: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    return min_eigenvalue(M) >= -tol.abs_residual


def is_nonsingular(M: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    return is_square(M) and rank(M, tol) == M.shape[0]


def embed(D: np.ndarray, n: int) -> np.ndarray:
    """diag(D, 0) of order n"""
    out = np.zeros((n, n))
    k = D.shape[0]
    out[:k, :k] = D
    return out


def solve(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """A⁻¹B by LU; callers guarantee A nonsingular"""
    if A.size == 0:
        return np.zeros((0, B.shape[1]))
    return sla.solve(A, B)


def spectral_radius(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(sla.eigvals(M))))
