"""Order reduction of constrained generalized Riccati equations.

Two rotations shrink the state space while keeping the solution set
reconstructible:

* kernel of A0: when A0 = A - B R† Sᵀ is singular, every solution agrees
  with Q0 on the trailing block of U = [U1 | U2], im U2 = ker A0;
* kernel of R: when A0 is nonsingular and R is singular, the same holds for
  V = [V1 | V2] with im V2 = A0⁻¹ B ker R.

The driver alternates these with cross-term elimination until A0 and R are
both nonsingular (a regular DARE), the input disappears (a Stein equation)
or no state is left.
"""
from typing import List, Optional, Tuple
import logging

import numpy as np

from app.config import settings
from app.exceptions import (
    LiftVerificationError,
    NotApplicable,
    NotOrthonormal,
    PreconditionViolated,
)
from app.models.riccati import (
    ClosedLoopReport,
    PopovTriple,
    ReductionChain,
    ReductionStep,
    SolutionFamily,
    SolutionSet,
    SteinEquation,
    StepKind,
    TerminalEquation,
    TerminalKind,
    Tolerance,
)
from app.services import popov
from app.utils import linalg
from app.utils.linalg import DEFAULT_TOL

logger = logging.getLogger(__name__)


def _empty(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols))


def _cross_step(source: PopovTriple, result: PopovTriple) -> ReductionStep:
    n, m = source.n, source.m
    return ReductionStep(
        kind=StepKind.CROSS_ELIM,
        state_transform=np.eye(n),
        input_transform=np.eye(m),
        q_offset=_empty(n, n),
        q11=_empty(0, 0), q12=_empty(0, 0), q22=_empty(0, 0),
        reduced_order=n,
        source=source,
        result=result,
    )


def _checked_basis(basis, subspace: np.ndarray, n: int, tol: Tolerance) -> np.ndarray:
    """Validate a caller-supplied orthogonal basis whose trailing columns span ``subspace``"""
    W = linalg.as_matrix(basis, rows=n, cols=n, name="basis")
    if not linalg.is_orthogonal(W, tol):
        raise NotOrthonormal("basis override is not orthogonal")
    k = subspace.shape[1]
    trailing = W[:, n - k:]
    # same subspace iff the projectors agree
    if linalg.max_norm(trailing @ trailing.T - subspace @ subspace.T) > tol.abs_residual:
        raise PreconditionViolated("trailing columns of the basis do not span the required subspace")
    return W


def _input_kernel_image(sigma0: PopovTriple, tol: Tolerance) -> np.ndarray:
    """Orthonormal basis of A0⁻¹ B ker R (A0 nonsingular)"""
    K_R = linalg.kernel_basis(sigma0.R, tol)
    B_ker = sigma0.B @ K_R
    if K_R.shape[1] == 0 or linalg.max_norm(B_ker) <= tol.abs_residual:
        return _empty(sigma0.n, 0)
    image = linalg.solve(sigma0.A, B_ker)
    return linalg.image_basis(image, tol)


def _blocks(Q_W: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return Q_W[:k, :k], Q_W[:k, k:], Q_W[k:, k:]


def step_kernel_a0(sigma: PopovTriple, tol: Tolerance = DEFAULT_TOL,
                   basis: Optional[np.ndarray] = None) -> Tuple[ReductionStep, PopovTriple]:
    """Remove ker A0 from the state space.

    With U = [U1 | U2], im U2 = ker A0, A_U = UᵀA0U = [Ã | 0]:
    Q1 = ÃᵀQ_UÃ, S1 = ÃᵀQ_U B_U, R1 = R + B_UᵀQ_U B_U and A1, B1 the
    leading n - ν rows of Ã and B_U.
    """
    tol = popov.noise_tolerance(sigma, tol)
    sigma0 = popov.eliminate_cross(sigma, tol)
    n, m = sigma0.n, sigma0.m
    A0, B, Q0, R = sigma0.A, sigma0.B, sigma0.Q, sigma0.R

    K = linalg.kernel_basis(A0, tol)
    nu = K.shape[1]
    if nu == 0:
        raise NotApplicable("A0 is nonsingular, ker A0 = {0}")
    U = linalg.orthonormal_extension(K, tol) if basis is None else _checked_basis(basis, K, n, tol)
    k = n - nu

    A_U = U.T @ A0 @ U
    A_tilde = A_U[:, :k]
    B_U = U.T @ B
    Q_U = linalg.symmetrize(U.T @ Q0 @ U)

    Q1 = A_tilde.T @ Q_U @ A_tilde
    S1 = A_tilde.T @ Q_U @ B_U
    R1 = R + B_U.T @ Q_U @ B_U
    reduced = popov.new_triple(A_tilde[:k], B_U[:k], linalg.symmetrize(Q1),
                               linalg.symmetrize(R1), S1, tol)

    q11, q12, q22 = _blocks(Q_U, k)
    step = ReductionStep(
        kind=StepKind.KERNEL_A0,
        state_transform=U,
        input_transform=np.eye(m),
        q_offset=Q0,
        q11=q11, q12=q12, q22=q22,
        reduced_order=k,
        deficiency=nu,
        source=sigma0,
        result=reduced,
    )
    logger.info(f"KernelA0 step: order {n} -> {k} (nu={nu})")
    return step, reduced


def step_kernel_r(sigma0: PopovTriple, tol: Tolerance = DEFAULT_TOL,
                  basis: Optional[np.ndarray] = None) -> Tuple[ReductionStep, PopovTriple]:
    """Remove A0⁻¹ B ker R from the state space (A0 nonsingular, R singular).

    With V = [V1 | V2], im V2 = A0⁻¹ B ker R: A1 = V1ᵀA0V1, B1 = V1ᵀB,
    Q1 and S1 the leading blocks of A_VᵀQ_V A_V and A_VᵀQ_V B_V,
    R1 = R + BᵀQ0B.
    """
    tol = popov.noise_tolerance(sigma0, tol)
    sigma0 = popov.eliminate_cross(sigma0, tol)
    n, m = sigma0.n, sigma0.m
    A0, B, Q0, R = sigma0.A, sigma0.B, sigma0.Q, sigma0.R

    if not linalg.is_nonsingular(A0, tol):
        raise NotApplicable("A0 is singular; remove ker A0 first")
    if linalg.is_nonsingular(R, tol):
        raise NotApplicable("R is nonsingular")
    W = _input_kernel_image(sigma0, tol)
    eta = W.shape[1]
    if eta == 0:
        raise NotApplicable("B ker R = {0}")
    V = linalg.orthonormal_extension(W, tol) if basis is None else _checked_basis(basis, W, n, tol)
    k = n - eta

    A_V = V.T @ A0 @ V
    B_V = V.T @ B
    Q_V = linalg.symmetrize(V.T @ Q0 @ V)

    Q1 = (A_V.T @ Q_V @ A_V)[:k, :k]
    S1 = (A_V.T @ Q_V @ B_V)[:k]
    R1 = R + B.T @ Q0 @ B
    reduced = popov.new_triple(A_V[:k, :k], B_V[:k], linalg.symmetrize(Q1),
                               linalg.symmetrize(R1), S1, tol)

    q11, q12, q22 = _blocks(Q_V, k)
    step = ReductionStep(
        kind=StepKind.KERNEL_R,
        state_transform=V,
        input_transform=np.eye(m),
        q_offset=Q0,
        q11=q11, q12=q12, q22=q22,
        reduced_order=k,
        deficiency=eta,
        source=sigma0,
        result=reduced,
    )
    logger.info(f"KernelR step: order {n} -> {k} (eta={eta})")
    return step, reduced


def split_input(sigma0: PopovTriple, tol: Tolerance = DEFAULT_TOL) -> Tuple[ReductionStep, TerminalEquation]:
    """Drop the input directions in ker R once B ker R = {0}.

    An orthogonal Ω brings R to diag(R1, 0) and B to [B1 | 0]; what is left
    is a regular DARE in (A0, B1, Q0, R1), or a Stein equation when R = 0 or
    B1 = 0.
    """
    tol = popov.noise_tolerance(sigma0, tol)
    sigma0 = popov.eliminate_cross(sigma0, tol)
    n, m = sigma0.n, sigma0.m
    A0, B, Q0, R = sigma0.A, sigma0.B, sigma0.Q, sigma0.R

    if not linalg.is_nonsingular(A0, tol):
        raise NotApplicable("A0 is singular")
    r = linalg.rank(R, tol)
    if r == m:
        raise NotApplicable("R is nonsingular")
    K_R = linalg.kernel_basis(R, tol)
    if linalg.max_norm(B @ K_R) > tol.abs_residual:
        raise NotApplicable("B ker R is not {0}")

    stein = TerminalEquation(kind=TerminalKind.STEIN, stein=SteinEquation(a0=A0, q0=Q0))
    if r == 0:
        omega = np.eye(m)
        terminal = stein
    else:
        # eigenvectors of R, nonzero eigenvalues first
        eigenvalues, vectors = np.linalg.eigh(R)
        order = np.argsort(-np.abs(eigenvalues), kind="stable")
        omega = linalg.orient_columns(vectors[:, order])
        R_hat = linalg.symmetrize(omega.T @ R @ omega)
        B_hat = B @ omega
        B1 = B_hat[:, :r]
        if linalg.max_norm(B1) <= tol.abs_residual:
            terminal = stein
        else:
            reduced = popov.new_triple(A0, B1, Q0, R_hat[:r, :r], None, tol)
            terminal = TerminalEquation(kind=TerminalKind.REGULAR_DARE, triple=reduced)

    step = ReductionStep(
        kind=StepKind.INPUT_SPLIT,
        state_transform=np.eye(n),
        input_transform=omega,
        q_offset=_empty(n, n),
        q11=_empty(0, 0), q12=_empty(0, 0), q22=_empty(0, 0),
        reduced_order=n,
        deficiency=m - r,
        source=sigma0,
    )
    logger.info(f"InputSplit step: rank R = {r} of {m}, terminal {terminal.kind.value}")
    return step, terminal


def reduce(sigma: PopovTriple, tol: Tolerance = DEFAULT_TOL) -> ReductionChain:
    """Reduce until the terminal equation is regular, linear or empty"""
    steps: List[ReductionStep] = []
    current = sigma
    terminal: Optional[TerminalEquation] = None
    # reduced triples inherit the rounding noise of the original
    tol = popov.noise_tolerance(sigma, tol)

    # every state-reducing step removes at least one dimension
    for _ in range(sigma.n + 1):
        if current.n == 0:
            terminal = TerminalEquation(kind=TerminalKind.EMPTY)
            break

        tol = popov.noise_tolerance(current, tol)
        sigma0 = popov.eliminate_cross(current, tol)
        steps.append(_cross_step(current, sigma0))

        if not linalg.is_nonsingular(sigma0.A, tol):
            step, current = step_kernel_a0(sigma0, tol)
            steps.append(step)
            continue

        if linalg.rank(sigma0.R, tol) < sigma0.m:
            if _input_kernel_image(sigma0, tol).shape[1] > 0:
                step, current = step_kernel_r(sigma0, tol)
                steps.append(step)
                continue
            step, terminal = split_input(sigma0, tol)
            steps.append(step)
            break

        terminal = TerminalEquation(kind=TerminalKind.REGULAR_DARE, triple=sigma0)
        break

    if terminal is None:
        raise PreconditionViolated("reduction did not terminate within n steps")

    chain = ReductionChain(original=sigma, steps=tuple(steps), terminal=terminal)
    logger.info(
        f"Reduced order {sigma.n} -> {terminal.order} in "
        f"{len(chain.reduction_steps)} step(s); terminal {terminal.kind.value}"
    )
    return chain


def _lift_matrix(step: ReductionStep, D: np.ndarray, offset: bool) -> np.ndarray:
    W = step.state_transform
    lifted = W @ linalg.embed(D, step.order) @ W.T
    if offset:
        lifted = lifted + step.q_offset
    return linalg.symmetrize(lifted)


def sample_parameters(dimension: int, per_parameter: int) -> List[np.ndarray]:
    """Deterministic parameter points: the origin plus points along every axis"""
    values = [-1.0, 0.5, 2.0, -3.0, 7.0]
    samples = [np.zeros(dimension)]
    for i in range(dimension):
        for j in range(per_parameter):
            point = np.zeros(dimension)
            point[i] = values[j % len(values)] * (1 + j // len(values))
            samples.append(point)
    return samples


def verify_family(sigma: PopovTriple, family: SolutionFamily, tol: Tolerance = DEFAULT_TOL,
                  per_parameter: Optional[int] = None) -> List[float]:
    """Residuals of sampled family members; raises when a member is rejected"""
    per_parameter = per_parameter or settings.lift_samples_per_parameter
    residuals = []
    for params in sample_parameters(family.dimension, per_parameter):
        X = family.member(params)
        check = popov.gdare_residual(sigma, X, tol)
        if not check.accepted:
            raise LiftVerificationError(
                f"member at parameters {params.tolist()} rejected: residual "
                f"{check.residual:.3g}, kernel condition {check.kernel_ok}"
            )
        residuals.append(check.residual)
    return residuals


def lift(chain: ReductionChain, terminal_solutions: SolutionSet,
         tol: Tolerance = DEFAULT_TOL, verify: bool = True) -> SolutionSet:
    """Map terminal solution families back to solutions of the original triple.

    A step with transform W maps Δ ↦ Q0 + W diag(Δ, 0) Wᵀ and a direction
    H ↦ W diag(H, 0) Wᵀ; cross-term elimination and input splits leave X alone.
    """
    families = []
    for family in terminal_solutions.families:
        base = np.array(family.base, dtype=float)
        basis = [np.array(H, dtype=float) for H in family.basis]
        for step in reversed(chain.steps):
            if not step.reduces_state:
                continue
            base = _lift_matrix(step, base, offset=True)
            basis = [_lift_matrix(step, H, offset=False) for H in basis]
        stabilizing = None
        if not basis:
            A_X = popov.closed_loop(chain.original, base, tol)
            stabilizing = linalg.spectral_radius(A_X) < 1.0
        lifted = SolutionFamily(base=base, basis=tuple(basis), stabilizing=stabilizing)
        if verify:
            verify_family(chain.original, lifted, tol)
        families.append(lifted)
    return SolutionSet(families=tuple(families), complete=terminal_solutions.complete)


def restrict(chain: ReductionChain, X: np.ndarray) -> List[np.ndarray]:
    """Reduced solutions Δ = (WᵀXW)₁₁ - Q₁₁, one per state-reducing step"""
    current = linalg.as_matrix(X, rows=chain.original.n, cols=chain.original.n, name="X")
    reduced = []
    for step in chain.reduction_steps:
        k = step.reduced_order
        W = step.state_transform
        current = linalg.symmetrize((W.T @ current @ W)[:k, :k] - step.q11)
        reduced.append(current)
    return reduced


def check_rigidity(step: ReductionStep, X: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Blocks of WᵀXW off the reduced corner are pinned to those of WᵀQ0W"""
    if not step.reduces_state:
        raise PreconditionViolated(f"{step.kind.value} steps carry no stored blocks")
    k = step.reduced_order
    X_W = step.state_transform.T @ X @ step.state_transform
    return (linalg.max_norm(X_W[:k, k:] - step.q12) <= tol.abs_residual
            and linalg.max_norm(X_W[k:, k:] - step.q22) <= tol.abs_residual)


def _spectrum_contained(inner: np.ndarray, outer: np.ndarray, tol: Tolerance) -> bool:
    if inner.size == 0:
        return True
    inner_eigs = np.linalg.eigvals(inner)
    outer_eigs = list(np.linalg.eigvals(outer))
    scale = max(1.0, linalg.max_norm(outer))
    threshold = max(tol.abs_residual, 1e-6) * scale
    # match with multiplicity
    for lam in inner_eigs:
        distances = [abs(lam - mu) for mu in outer_eigs]
        if not distances or min(distances) > threshold:
            return False
        outer_eigs.pop(int(np.argmin(distances)))
    return True


def closed_loop_report(step: ReductionStep, X: np.ndarray, delta: np.ndarray,
                       tol: Tolerance = DEFAULT_TOL,
                       sigma: Optional[PopovTriple] = None) -> ClosedLoopReport:
    """Compare WᵀA_XW with the closed loop of the reduced solution Δ.

    ``sigma`` defaults to the step source; any triple with the same
    cross-term-free form has the same closed loop.
    """
    if not step.reduces_state:
        raise PreconditionViolated(f"closed-loop structure is undefined for {step.kind.value} steps")
    k = step.reduced_order
    W = step.state_transform
    A_X = popov.closed_loop(sigma if sigma is not None else step.source, X, tol)
    transformed = W.T @ A_X @ W
    A_delta = popov.closed_loop(step.result, delta, tol)
    return ClosedLoopReport(
        top_left_matches=linalg.max_norm(transformed[:k, :k] - A_delta) <= tol.abs_residual,
        zero_column_block=linalg.max_norm(transformed[:, k:]) <= tol.abs_residual,
        spectrum_contained=_spectrum_contained(A_delta, A_X, tol),
    )


def check_closed_loop_structure(sigma: PopovTriple, X: np.ndarray, step: ReductionStep,
                                delta: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    """WᵀA_XW = [[A_Δ, 0], [*, 0]] within tolerance.

    Guaranteed for kernel-of-A0 steps; kernel-of-R steps may fail it.
    """
    if sigma.n != step.order:
        raise PreconditionViolated(f"triple of order {sigma.n} does not match step of order {step.order}")
    return closed_loop_report(step, X, delta, tol, sigma=sigma).block_form_holds
