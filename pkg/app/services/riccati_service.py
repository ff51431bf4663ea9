from typing import List, Optional, Tuple
import logging

import numpy as np

from app.config import Settings, settings
from app.exceptions import NoRealSolutionFound, RiccatiError
from app.models.riccati import (
    Diagnosis,
    PopovTriple,
    ReductionChain,
    ResidualCheck,
    SolutionFamily,
    SolutionSet,
    SteinStatus,
    TerminalKind,
    Tolerance,
)
from app.services import pencil, popov, reduction, solvers
from app.utils.logger import log_function_call

logger = logging.getLogger(__name__)


class RiccatiService:
    """Entry points shared by the command line and the HTTP API"""

    def __init__(self, config: Optional[Settings] = None):
        self.config = config or settings
        self.tol = Tolerance.from_settings(self.config)

    def tolerance(self, rel: Optional[float] = None, abs_residual: Optional[float] = None) -> Tolerance:
        return Tolerance(
            rel=rel or self.tol.rel,
            abs_residual=abs_residual or self.tol.abs_residual,
        )

    @log_function_call(logger)
    def reduce(self, sigma: PopovTriple, tol: Optional[Tolerance] = None) -> ReductionChain:
        return reduction.reduce(sigma, tol or self.tol)

    def solve_terminal(self, chain: ReductionChain, tol: Optional[Tolerance] = None) -> SolutionSet:
        tol = tol or self.tol
        terminal = chain.terminal
        if terminal.kind == TerminalKind.EMPTY:
            return SolutionSet(families=(SolutionFamily(base=np.zeros((0, 0))),))
        if terminal.kind == TerminalKind.STEIN:
            report = solvers.solve_stein(terminal.stein, tol)
            if report.status == SteinStatus.INCONSISTENT:
                raise NoRealSolutionFound(
                    f"terminal Stein equation of order {terminal.order} is inconsistent"
                )
            return report.solution
        return solvers.solve_regular_dare(terminal.triple, tol, self.config.max_enumeration_order)

    @log_function_call(logger)
    def solve(self, sigma: PopovTriple, tol: Optional[Tolerance] = None) -> Tuple[ReductionChain, SolutionSet]:
        """Reduce, solve the terminal equation and lift back with verification"""
        return self._solve(sigma, tol or self.tol)

    def _solve(self, sigma: PopovTriple, tol: Tolerance) -> Tuple[ReductionChain, SolutionSet]:
        chain = reduction.reduce(sigma, tol)
        terminal_solutions = self.solve_terminal(chain, tol)
        solutions = reduction.lift(chain, terminal_solutions, tol)
        logger.info(
            f"{len(solutions.families)} solution family(ies) for a triple of order {sigma.n}"
        )
        return chain, solutions

    def member_residuals(self, sigma: PopovTriple, family: SolutionFamily,
                         tol: Optional[Tolerance] = None) -> List[float]:
        return reduction.verify_family(
            sigma, family, tol or self.tol, self.config.lift_samples_per_parameter
        )

    @log_function_call(logger)
    def diagnose(self, sigma: PopovTriple, tol: Optional[Tolerance] = None,
                 solutions: Optional[SolutionSet] = None) -> Diagnosis:
        """Pencil diagnostics; solutions are computed when not supplied"""
        tol = tol or self.tol
        if solutions is None:
            try:
                _, solutions = self._solve(sigma, tol)
            except RiccatiError as e:
                logger.warning(f"diagnosing without solutions: {str(e)}")
                solutions = None
        return pencil.diagnose(sigma, tol, solutions, seed=self.config.seed)

    @log_function_call(logger)
    def verify(self, sigma: PopovTriple, X: np.ndarray, tol: Optional[Tolerance] = None) -> ResidualCheck:
        return popov.gdare_residual(sigma, X, tol or self.tol)
