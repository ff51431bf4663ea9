"""Extended symplectic pencil N - zM and the singularity diagnostics built on it."""
from typing import List, Optional
import logging

import numpy as np

from app.config import settings
from app.exceptions import InvariantViolation
from app.models.riccati import Diagnosis, PencilPair, PopovTriple, SolutionSet, Tolerance
from app.services import popov
from app.services.reduction import sample_parameters
from app.utils import linalg
from app.utils.linalg import DEFAULT_TOL

logger = logging.getLogger(__name__)


def build_pencil(sigma: PopovTriple) -> PencilPair:
    """M = [[I,0,0],[0,-Aᵀ,0],[0,-Bᵀ,0]], N = [[A,0,B],[Q,-I,S],[Sᵀ,0,R]]"""
    n, m = sigma.n, sigma.m
    size = 2 * n + m
    M = np.zeros((size, size))
    N = np.zeros((size, size))

    M[:n, :n] = np.eye(n)
    M[n:2 * n, n:2 * n] = -sigma.A.T
    M[2 * n:, n:2 * n] = -sigma.B.T

    N[:n, :n] = sigma.A
    N[:n, 2 * n:] = sigma.B
    N[n:2 * n, :n] = sigma.Q
    N[n:2 * n, n:2 * n] = -np.eye(n)
    N[n:2 * n, 2 * n:] = sigma.S
    N[2 * n:, :n] = sigma.S.T
    N[2 * n:, 2 * n:] = sigma.R
    return PencilPair(M=M, N=N)


def is_regular(pair: PencilPair, tol: Tolerance = DEFAULT_TOL, seed: Optional[int] = None) -> bool:
    """det(N - zM) is not identically zero.

    det(N - zM) has degree at most size, so it cannot vanish at size + 2
    distinct points unless it is the zero polynomial.
    """
    size = pair.size
    if size == 0:
        return True
    rng = np.random.default_rng(settings.seed if seed is None else seed)
    points = rng.uniform(-2.0, 2.0, size=size + 2)
    for z in points:
        if linalg.is_nonsingular(pair.N - z * pair.M, tol):
            logger.debug(f"pencil of size {size} is regular (witness z = {z:.6g})")
            return True
    return False


def _verified_members(sigma: PopovTriple, solutions: SolutionSet, tol: Tolerance) -> List[np.ndarray]:
    members = []
    for family in solutions.families:
        for params in sample_parameters(family.dimension, settings.lift_samples_per_parameter):
            X = family.member(params)
            if popov.gdare_residual(sigma, X, tol).accepted:
                members.append(X)
            else:
                logger.warning("skipping a solution that does not pass the residual check")
    return members


def diagnose(sigma: PopovTriple, tol: Tolerance = DEFAULT_TOL,
             solutions: Optional[SolutionSet] = None, seed: Optional[int] = None) -> Diagnosis:
    """Pencil regularity, N singularity and the closed-loop singularity predictor.

    N is singular exactly when R or A0 is; a disagreement means a rank was
    misclassified at the current tolerance. rank R_X and the predictor need
    at least one verified solution.
    """
    tol = popov.noise_tolerance(sigma, tol)
    pair = build_pencil(sigma)
    pencil_regular = is_regular(pair, tol, seed)
    N_singular = not linalg.is_nonsingular(pair.N, tol)

    rank_R = linalg.rank(sigma.R, tol)
    R_singular = rank_R < sigma.m
    A0_singular = not linalg.is_nonsingular(popov.a0_matrix(sigma, tol), tol)

    if N_singular != (R_singular or A0_singular):
        raise InvariantViolation(
            f"N singular = {N_singular} but R singular = {R_singular}, A0 singular = {A0_singular}"
        )

    rank_RX = None
    predicted = None
    observed = None
    members = _verified_members(sigma, solutions, tol) if solutions is not None else []
    if members:
        ranks = set()
        observed = False
        for X in members:
            x_tol = popov.noise_tolerance(sigma, tol, X)
            d = popov.derived(sigma, X, x_tol)
            if not linalg.ker_included(d.R_X, sigma.R, x_tol):
                raise InvariantViolation("ker R_X is not contained in ker R for a verified solution")
            ranks.add(linalg.rank(d.R_X, x_tol))
            observed = observed or not linalg.is_nonsingular(d.A_X, x_tol)
        if len(ranks) != 1:
            raise InvariantViolation(f"rank R_X differs across solutions: {sorted(ranks)}")
        rank_RX = ranks.pop()
        predicted = rank_R < rank_RX or A0_singular
        if predicted != observed:
            logger.warning(
                f"closed-loop singularity predicted {predicted} but observed {observed}"
            )

    return Diagnosis(
        pencil_regular=pencil_regular,
        N_singular=N_singular,
        R_singular=R_singular,
        A0_singular=A0_singular,
        rank_R=rank_R,
        rank_RX=rank_RX,
        closed_loop_singular_predicted=predicted,
        closed_loop_singular_observed=observed,
    )
