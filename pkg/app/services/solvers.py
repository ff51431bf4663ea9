"""Solvers for the terminal equations left by the reduction driver."""
from itertools import combinations
from typing import Dict, List, Optional, Tuple
import logging

import numpy as np
from scipy import linalg as sla

from app.config import settings
from app.exceptions import NoRealSolutionFound, PreconditionViolated
from app.models.riccati import (
    PopovTriple,
    SolutionFamily,
    SolutionSet,
    SteinEquation,
    SteinSolveReport,
    SteinStatus,
    Tolerance,
)
from app.services import popov
from app.utils import linalg
from app.utils.linalg import DEFAULT_TOL

logger = logging.getLogger(__name__)


# Stein equations

def symmetric_basis(k: int) -> List[np.ndarray]:
    """Orthonormal basis (Frobenius inner product) of the k×k symmetric matrices"""
    basis = []
    for i in range(k):
        for j in range(i, k):
            E = np.zeros((k, k))
            if i == j:
                E[i, i] = 1.0
            else:
                E[i, j] = E[j, i] = 1.0 / np.sqrt(2.0)
            basis.append(E)
    return basis


def svec(X: np.ndarray, basis: List[np.ndarray]) -> np.ndarray:
    """Coordinates of symmetric X in the given orthonormal basis"""
    return np.array([np.sum(E * X) for E in basis])


def smat(x: np.ndarray, basis: List[np.ndarray], k: int) -> np.ndarray:
    """Inverse of svec: the k×k matrix with coordinates x"""
    X = np.zeros((k, k))
    for coefficient, E in zip(x, basis):
        X = X + coefficient * E
    return X


def stein_residual(eq: SteinEquation, X: np.ndarray) -> float:
    """Max-norm of A0ᵀXA0 + Q0 - X"""
    return linalg.max_norm(eq.a0.T @ X @ eq.a0 + eq.q0 - X)


def solve_stein(eq: SteinEquation, tol: Tolerance = DEFAULT_TOL) -> SteinSolveReport:
    """Solve X = A0ᵀXA0 + Q0 over symmetric X.

    The operator X ↦ X - A0ᵀXA0 is assembled on the half-vectorized symmetric
    subspace. A singular but consistent operator yields the minimum-norm
    particular solution plus an orthonormal basis of {H = A0ᵀHA0}.
    """
    k = eq.order
    if k == 0:
        solution = SolutionSet(families=(SolutionFamily(base=np.zeros((0, 0))),))
        return SteinSolveReport(status=SteinStatus.UNIQUE, solution=solution)

    basis = symmetric_basis(k)
    operator = np.column_stack([svec(E - eq.a0.T @ E @ eq.a0, basis) for E in basis])
    rhs = svec(linalg.symmetrize(eq.q0), basis)
    p = len(basis)
    tol = tol.at_scale(max(1.0, linalg.max_norm(eq.a0)) ** 2, p)

    if linalg.rank(operator, tol) == p:
        X = linalg.symmetrize(smat(sla.solve(operator, rhs), basis, k))
        if stein_residual(eq, X) > tol.abs_residual:
            logger.warning(f"Stein solution residual {stein_residual(eq, X):.3g} above tolerance")
            return SteinSolveReport(status=SteinStatus.INCONSISTENT)
        solution = SolutionSet(families=(SolutionFamily(base=X),))
        return SteinSolveReport(status=SteinStatus.UNIQUE, solution=solution)

    X = linalg.symmetrize(smat(linalg.pinv(operator, tol) @ rhs, basis, k))
    residual = stein_residual(eq, X)
    if residual > tol.abs_residual:
        logger.info(f"Stein equation of order {k} is inconsistent (residual {residual:.3g})")
        return SteinSolveReport(status=SteinStatus.INCONSISTENT)

    kernel = linalg.kernel_basis(operator, tol)
    directions = tuple(linalg.symmetrize(smat(kernel[:, i], basis, k)) for i in range(kernel.shape[1]))
    family = SolutionFamily(base=X, basis=directions)
    logger.info(f"Stein equation of order {k} has a {len(directions)}-parameter family")
    return SteinSolveReport(
        status=SteinStatus.FAMILY,
        dimension=len(directions),
        solution=SolutionSet(families=(family,)),
    )


# Regular DARE

def symplectic_matrix(sigma: PopovTriple, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Z with Z [I; X] = [I; X] A_X for every solution X (R and A0 nonsingular)"""
    n = sigma.n
    R_inv_St = linalg.solve(sigma.R, sigma.S.T)
    A0 = sigma.A - sigma.B @ R_inv_St
    Q0 = linalg.symmetrize(sigma.Q - sigma.S @ R_inv_St)
    G = sigma.B @ linalg.solve(sigma.R, sigma.B.T)
    A0_inv_T = linalg.solve(A0.T, np.eye(n))
    return np.block([
        [A0 + G @ A0_inv_T @ Q0, -G @ A0_inv_T],
        [-A0_inv_T @ Q0, A0_inv_T],
    ])


def _same_subspace(P: np.ndarray, Q: np.ndarray) -> bool:
    return P.shape == Q.shape and linalg.max_norm(P @ P.T - Q @ Q.T) <= 1e-8


def _cluster_eigenvalues(eigenvalues: np.ndarray) -> List[Tuple[complex, List[int]]]:
    """Group numerically repeated eigenvalues; conjugates below the real axis are dropped"""
    clusters: List[Tuple[complex, List[int]]] = []
    for i, lam in enumerate(eigenvalues):
        if lam.imag < -1e-9 * max(1.0, abs(lam)):
            continue
        for rep, members in clusters:
            if abs(lam - rep) <= 1e-6 * max(1.0, abs(rep)):
                members.append(i)
                break
        else:
            clusters.append((lam, [i]))
    return clusters


def _cluster_options(Z: np.ndarray, eigenvalues: np.ndarray, vectors: np.ndarray,
                     rep: complex, members: List[int]) -> Tuple[List[np.ndarray], bool]:
    """Real invariant subspaces available inside one eigenvalue cluster.

    The flag is set when the eigenspace has more than one independent
    direction: every proper nonzero invariant subspace of the cluster then
    belongs to a continuum and only finitely many of them are listed.
    """
    size = Z.shape[0]
    is_real = abs(rep.imag) <= 1e-9 * max(1.0, abs(rep))
    width = 1 if is_real else 2
    options = [np.zeros((size, 0))]

    def add(candidate: np.ndarray):
        if candidate.shape[1] == 0:
            return
        if not any(_same_subspace(candidate, known) for known in options):
            options.append(candidate)

    loose = Tolerance(rel=1e-7, abs_residual=1e-8)
    for count in range(1, len(members) + 1):
        for chosen in combinations(members, count):
            columns = []
            for i in chosen:
                v = vectors[:, i]
                columns.extend([v.real] if is_real else [v.real, v.imag])
            candidate = linalg.image_basis(np.column_stack(columns), loose)
            if candidate.shape[1] == width * count:
                add(candidate)

    continuous = False
    if len(members) > 1:
        # generalized eigenvectors of a defective cluster
        lam = complex(np.mean(eigenvalues[members]))
        if is_real:
            P = Z - lam.real * np.eye(size)
        else:
            P = Z @ Z - 2.0 * lam.real * Z + abs(lam) ** 2 * np.eye(size)
        continuous = linalg.kernel_basis(P, loose).shape[1] > width
        power = np.eye(size)
        for _ in range(len(members)):
            power = power @ P
            add(linalg.kernel_basis(power, loose))
    return options, continuous


def _invariant_subspaces(Z: np.ndarray, k: int) -> List[Tuple[np.ndarray, bool]]:
    """k-dimensional real invariant subspaces assembled cluster by cluster.

    Each subspace comes with a flag telling whether it was cut from a
    continuous cluster, in which case neighbouring subspaces are missed.
    """
    eigenvalues, vectors = sla.eig(Z)
    clusters = _cluster_eigenvalues(eigenvalues)
    options, continuous = [], []
    for rep, members in clusters:
        cluster_options, cluster_continuous = _cluster_options(Z, eigenvalues, vectors, rep, members)
        options.append(cluster_options)
        continuous.append(cluster_continuous)
    full = [max(o.shape[1] for o in opts) for opts in options]
    capacity = [sum(full[i:]) for i in range(len(options))]

    found: List[Tuple[np.ndarray, bool]] = []

    def walk(index: int, chosen: List[np.ndarray], dim: int, partial: bool):
        if dim == k:
            subspace = np.column_stack(chosen) if chosen else np.zeros((Z.shape[0], 0))
            found.append((subspace, partial))
            return
        if index == len(options) or dim + capacity[index] < k:
            return
        for option in options[index]:
            width = option.shape[1]
            if dim + width <= k:
                cut = continuous[index] and 0 < width < full[index]
                walk(index + 1, chosen + ([option] if width else []), dim + width, partial or cut)

    walk(0, [], 0, False)
    return found


def _graph_solution(subspace: np.ndarray, k: int, tol: Tolerance) -> Optional[np.ndarray]:
    X1, X2 = subspace[:k], subspace[k:]
    if not linalg.is_nonsingular(X1, tol):
        return None
    return linalg.solve(X1.T, X2.T).T


def _stabilizing_candidate(Z: np.ndarray, k: int, tol: Tolerance) -> Optional[np.ndarray]:
    _, basis, sdim = sla.schur(Z, output="real", sort="iuc")
    if sdim != k:
        return None
    return _graph_solution(basis[:, :k], k, tol)


def _admissible(sigma: PopovTriple, X: np.ndarray, tol: Tolerance) -> bool:
    if linalg.max_norm(X - X.T) > tol.abs_residual * max(1.0, linalg.max_norm(X)):
        return False
    X = linalg.symmetrize(X)
    if not popov.gdare_residual(sigma, X, tol).accepted:
        return False
    R_X = sigma.R + sigma.B.T @ X @ sigma.B
    return linalg.is_nonsingular(R_X, popov.noise_tolerance(sigma, tol, X))


def _sort_key(X: np.ndarray):
    return (round(float(np.trace(X)), 10), tuple(np.round(X, 10).ravel()))


def solve_regular_dare(sigma: PopovTriple, tol: Tolerance = DEFAULT_TOL,
                       max_order: Optional[int] = None) -> SolutionSet:
    """Enumerate the real symmetric solutions of a DARE with R and A0 nonsingular.

    Solutions are graphs [I; X] of k-dimensional invariant subspaces of the
    symplectic matrix. Up to ``max_order`` every combination of eigenvalue
    clusters is tried; above it only the stabilizing solution is returned.
    When an eigenvalue of Z has more than one independent eigenvector the
    solutions may form a continuum; the listed ones are then marked incomplete.
    """
    max_order = max_order or settings.max_enumeration_order
    k = sigma.n
    noise = popov.noise_tolerance(sigma, tol)
    if not linalg.is_nonsingular(sigma.R, noise):
        raise PreconditionViolated("regular DARE requires R nonsingular")
    A0 = popov.a0_matrix(sigma, tol)
    if not linalg.is_nonsingular(A0, noise):
        raise PreconditionViolated("regular DARE requires A - B R⁻¹ Sᵀ nonsingular")

    if k == 0:
        return SolutionSet(families=(SolutionFamily(base=np.zeros((0, 0)), stabilizing=True),))

    if linalg.max_norm(sigma.B) <= tol.abs_residual:
        Q0 = linalg.symmetrize(sigma.Q - sigma.S @ linalg.solve(sigma.R, sigma.S.T))
        report = solve_stein(SteinEquation(a0=A0, q0=Q0), noise)
        if report.status == SteinStatus.INCONSISTENT:
            raise NoRealSolutionFound("input-free DARE reduces to an inconsistent Stein equation")
        return report.solution

    Z = symplectic_matrix(sigma, tol)
    candidates: List[np.ndarray] = []
    stabilizing = _stabilizing_candidate(Z, k, tol)
    if stabilizing is not None:
        candidates.append(stabilizing)
    complete = True
    if k <= max_order:
        for subspace, partial in _invariant_subspaces(Z, k):
            complete = complete and not partial
            X = _graph_solution(subspace, k, tol)
            if X is not None:
                candidates.append(X)
        if not complete:
            logger.warning(
                f"DARE of order {k} has repeated eigenvalues with several eigenvectors; "
                f"its solutions may form a continuum and the returned set is incomplete"
            )
    else:
        complete = False
        logger.warning(
            f"DARE of order {k} exceeds the enumeration limit {max_order}; "
            f"only the stabilizing solution is returned"
        )

    accepted: List[np.ndarray] = []
    for X in candidates:
        if not _admissible(sigma, X, noise):
            continue
        X = linalg.symmetrize(X)
        scale = max(1.0, linalg.max_norm(X))
        if any(linalg.max_norm(X - Y) <= tol.abs_residual * scale for Y in accepted):
            continue
        accepted.append(X)

    if not accepted:
        raise NoRealSolutionFound(
            f"no real symmetric solution among {len(candidates)} candidate subspaces"
        )

    accepted.sort(key=_sort_key)
    families = []
    for X in accepted:
        radius = linalg.spectral_radius(popov.closed_loop(sigma, X, tol))
        families.append(SolutionFamily(base=X, stabilizing=radius < 1.0))
    logger.info(f"DARE of order {k}: {len(families)} real symmetric solution(s)")
    return SolutionSet(families=tuple(families), complete=complete)


# Fixed-point oracle

def dare_fixed_point_oracle(sigma: PopovTriple, X_init: Optional[np.ndarray] = None,
                            max_iter: Optional[int] = None,
                            tol: Tolerance = DEFAULT_TOL) -> Optional[np.ndarray]:
    """Iterate the Riccati map from X_init; None when it does not settle"""
    if not linalg.is_nonsingular(sigma.R, popov.noise_tolerance(sigma, tol)):
        raise PreconditionViolated("fixed-point iteration requires R nonsingular")
    max_iter = max_iter or settings.oracle_max_iter
    A, B, Q, R, S = sigma.A, sigma.B, sigma.Q, sigma.R, sigma.S
    X = np.zeros((sigma.n, sigma.n)) if X_init is None else np.array(X_init, dtype=float)

    with np.errstate(over="ignore", invalid="ignore"):
        for iteration in range(max_iter):
            try:
                gain = sla.solve(R + B.T @ X @ B, S.T + B.T @ X @ A)
            except (sla.LinAlgError, ValueError):
                logger.debug(f"Riccati map undefined at iteration {iteration}")
                return None
            X_next = linalg.symmetrize(A.T @ X @ A - (A.T @ X @ B + S) @ gain + Q)
            if not np.all(np.isfinite(X_next)):
                return None
            if linalg.max_norm(X_next - X) <= tol.abs_residual:
                return X_next
            X = X_next
    logger.debug(f"fixed-point iteration did not converge in {max_iter} steps")
    return None
