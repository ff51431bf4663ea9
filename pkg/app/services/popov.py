from typing import Optional
import logging

import numpy as np

from app.exceptions import (
    AsymmetryBeyondTolerance,
    DimensionMismatch,
    PopovNotPSD,
    PreconditionViolated,
    SingularTransform,
)
from app.models.riccati import PopovTriple, ResidualCheck, Tolerance, XDerived
from app.utils import linalg
from app.utils.linalg import DEFAULT_TOL

logger = logging.getLogger(__name__)


def new_triple(A, B, Q, R, S=None, tol: Tolerance = DEFAULT_TOL) -> PopovTriple:
    """Validate raw matrices and build a Popov triple.

    Q and R are symmetrized after the asymmetry check; S defaults to zero.
    """
    A = linalg.as_matrix(A, name="A")
    n = A.shape[0]
    if A.shape[1] != n:
        raise DimensionMismatch(f"A must be square, got shape {A.shape}")
    B = linalg.as_matrix(B, rows=n, name="B")
    m = B.shape[1]
    Q = linalg.as_matrix(Q, rows=n, cols=n, name="Q")
    R = linalg.as_matrix(R, rows=m, cols=m, name="R")
    S = np.zeros((n, m)) if S is None else linalg.as_matrix(S, rows=n, cols=m, name="S")

    for name, M in (("Q", Q), ("R", R)):
        if linalg.max_norm(M - M.T) > tol.abs_residual:
            raise AsymmetryBeyondTolerance(
                f"{name} is not symmetric (max |{name} - {name}ᵀ| = {linalg.max_norm(M - M.T):.3g})"
            )
    Q = linalg.symmetrize(Q)
    R = linalg.symmetrize(R)

    popov = np.block([[Q, S], [S.T, R]])
    min_eig = linalg.min_eigenvalue(popov)
    if min_eig < -tol.abs_residual:
        raise PopovNotPSD(min_eig)

    return PopovTriple(A=A, B=B, Q=Q, R=R, S=S)


def noise_tolerance(sigma: PopovTriple, tol: Tolerance = DEFAULT_TOL,
                    X: Optional[np.ndarray] = None) -> Tolerance:
    """``tol`` with a floor at rounding-noise level for matrices computed from the triple.

    Blocks that cancel exactly in theory come out as noise proportional to
    the largest entry involved; with X given, the R_X and S_X products count too.
    """
    system = max(linalg.max_norm(sigma.A), linalg.max_norm(sigma.B))
    scale = max(system, linalg.max_norm(sigma.popov))
    if X is not None:
        scale = max(scale, linalg.max_norm(np.asarray(X)) * system ** 2)
    return tol.at_scale(scale, sigma.n + sigma.m)


def _check_solution(sigma: PopovTriple, X: np.ndarray, tol: Tolerance) -> np.ndarray:
    X = linalg.as_matrix(X, rows=sigma.n, cols=sigma.n, name="X")
    if not linalg.is_symmetric(X, tol):
        raise AsymmetryBeyondTolerance(
            f"X is not symmetric (max |X - Xᵀ| = {linalg.max_norm(X - X.T):.3g})"
        )
    return X


def derived(sigma: PopovTriple, X: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> XDerived:
    """R_X, S_X, G_X, K_X and the closed-loop matrix A_X for a candidate X"""
    X = linalg.as_matrix(X, rows=sigma.n, cols=sigma.n, name="X")
    A, B = sigma.A, sigma.B
    tol = noise_tolerance(sigma, tol, X)
    R_X = linalg.symmetrize(sigma.R + B.T @ X @ B)
    S_X = A.T @ X @ B + sigma.S
    R_X_pinv = linalg.pinv(R_X, tol)
    G_X = np.eye(sigma.m) - R_X_pinv @ R_X
    K_X = R_X_pinv @ S_X.T
    A_X = A - B @ K_X
    return XDerived(R_X=R_X, S_X=S_X, G_X=G_X, K_X=K_X, A_X=A_X)


def gdare_residual(sigma: PopovTriple, X: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> ResidualCheck:
    """Max-norm residual of the generalized equation plus the kernel condition"""
    X = _check_solution(sigma, X, tol)
    tol = noise_tolerance(sigma, tol, X)
    d = derived(sigma, X, tol)
    rhs = sigma.A.T @ X @ sigma.A - d.S_X @ linalg.pinv(d.R_X, tol) @ d.S_X.T + sigma.Q
    residual = linalg.max_norm(rhs - X)
    kernel_ok = linalg.ker_included(d.R_X, d.S_X, tol)
    return ResidualCheck(
        residual=residual,
        kernel_ok=kernel_ok,
        accepted=residual <= tol.abs_residual and kernel_ok,
    )


def eliminate_cross(sigma: PopovTriple, tol: Tolerance = DEFAULT_TOL) -> PopovTriple:
    """Move the cross term S into A and Q; the solution set is unchanged"""
    tol = noise_tolerance(sigma, tol)
    R_pinv = linalg.pinv(sigma.R, tol)
    A0 = sigma.A - sigma.B @ R_pinv @ sigma.S.T
    Q0 = sigma.Q - sigma.S @ R_pinv @ sigma.S.T
    return new_triple(A0, sigma.B, linalg.symmetrize(Q0), sigma.R,
                      np.zeros((sigma.n, sigma.m)), tol)


def has_cross_term(sigma: PopovTriple, tol: Tolerance = DEFAULT_TOL) -> bool:
    return linalg.max_norm(sigma.S) > tol.abs_residual


def transform_state(sigma0: PopovTriple, T: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> PopovTriple:
    """Change of state coordinates x = T x_T on a cross-term-free triple.

    A_T = T⁻¹A₀T, B_T = T⁻¹B, Q_T = TᵀQ₀T; X solves the original equation iff
    TᵀXT solves the transformed one. For orthogonal T, Tᵀ = T⁻¹.
    """
    if has_cross_term(sigma0, tol):
        raise PreconditionViolated("transform_state expects a triple with S = 0")
    tol = noise_tolerance(sigma0, tol)
    T = linalg.as_matrix(T, rows=sigma0.n, cols=sigma0.n, name="T")
    if not linalg.is_nonsingular(T, tol):
        raise SingularTransform(f"transform of order {sigma0.n} has rank {linalg.rank(T, tol)}")
    A_T = linalg.solve(T, sigma0.A @ T)
    B_T = linalg.solve(T, sigma0.B)
    Q_T = linalg.symmetrize(T.T @ sigma0.Q @ T)
    return new_triple(A_T, B_T, Q_T, sigma0.R, None, tol)


def transform_solution(X: np.ndarray, T: np.ndarray) -> np.ndarray:
    """X ↦ TᵀXT, the solution map matching transform_state"""
    return T.T @ X @ T


def closed_loop(sigma: PopovTriple, X: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    return derived(sigma, X, tol).A_X


def is_solution(sigma: PopovTriple, X: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    return gdare_residual(sigma, X, tol).accepted


def a0_matrix(sigma: PopovTriple, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """A - B R† Sᵀ without building a new triple"""
    tol = noise_tolerance(sigma, tol)
    return sigma.A - sigma.B @ linalg.pinv(sigma.R, tol) @ sigma.S.T

