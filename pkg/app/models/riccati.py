from enum import Enum
from typing import Annotated, Optional, Tuple, Sequence

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field


def _readonly_matrix(value) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a two-dimensional array, got ndim={arr.ndim}")
    arr.setflags(write=False)
    return arr


Matrix = Annotated[np.ndarray, BeforeValidator(_readonly_matrix)]


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


# rounding noise relative to the largest entry a computed matrix was built from
NOISE_LEVEL = 1e-12


class Tolerance(_Frozen):
    rel: float = Field(default=1e-10, gt=0)
    abs_residual: float = Field(default=1e-8, gt=0)
    # absolute cutoff; zero keeps rank decisions invariant under scaling
    floor: float = Field(default=0.0, ge=0)

    @classmethod
    def from_settings(cls, config=None) -> "Tolerance":
        if config is None:
            from app.config import settings as config
        return cls(rel=config.rel_tol, abs_residual=config.abs_residual)

    def cutoff(self, singular_values: np.ndarray, shape: Sequence[int]) -> float:
        """Singular values at or below this value count as zero"""
        if singular_values.size == 0:
            return self.floor
        return max(self.rel * max(shape) * float(singular_values[0]), self.floor)

    def at_scale(self, scale: float, size: int) -> "Tolerance":
        """This tolerance with the floor raised to rounding-noise level for entries of magnitude ``scale``"""
        floor = NOISE_LEVEL * max(size, 1) * scale
        if floor <= self.floor:
            return self
        return self.model_copy(update={"floor": floor})


class PopovTriple(_Frozen):
    """System matrices (A, B) and the cost blocks of the Popov matrix"""

    A: Matrix
    B: Matrix
    Q: Matrix
    R: Matrix
    S: Matrix

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def popov(self) -> np.ndarray:
        return np.block([[self.Q, self.S], [self.S.T, self.R]])


class XDerived(_Frozen):
    R_X: Matrix
    S_X: Matrix
    G_X: Matrix
    K_X: Matrix
    A_X: Matrix


class ResidualCheck(_Frozen):
    residual: float
    kernel_ok: bool
    accepted: bool


class StepKind(str, Enum):
    CROSS_ELIM = "CrossElim"
    KERNEL_A0 = "KernelA0"
    KERNEL_R = "KernelR"
    INPUT_SPLIT = "InputSplit"


class ReductionStep(_Frozen):
    """One link of a reduction chain.

    For KernelA0/KernelR steps ``state_transform`` is the orthogonal W = [W1 | W2]
    whose trailing ``deficiency`` columns span the removed subspace, and
    ``q11``/``q12``/``q22`` are the blocks of WᵀQ0W. Every solution X of
    ``source`` satisfies X = q_offset + W diag(Δ, 0) Wᵀ with Δ a solution of
    ``result``.
    """

    kind: StepKind
    state_transform: Matrix
    input_transform: Matrix
    q_offset: Matrix
    q11: Matrix
    q12: Matrix
    q22: Matrix
    reduced_order: int = Field(ge=0)
    deficiency: int = Field(default=0, ge=0)
    source: PopovTriple
    result: Optional[PopovTriple] = None

    @property
    def order(self) -> int:
        return self.source.n

    @property
    def reduces_state(self) -> bool:
        return self.kind in (StepKind.KERNEL_A0, StepKind.KERNEL_R)


class SteinEquation(_Frozen):
    """X = A0ᵀ X A0 + Q0"""

    a0: Matrix
    q0: Matrix

    @property
    def order(self) -> int:
        return self.a0.shape[0]


class TerminalKind(str, Enum):
    REGULAR_DARE = "RegularDARE"
    STEIN = "Stein"
    EMPTY = "Empty"


class TerminalEquation(_Frozen):
    kind: TerminalKind
    triple: Optional[PopovTriple] = None
    stein: Optional[SteinEquation] = None

    @property
    def order(self) -> int:
        if self.kind == TerminalKind.REGULAR_DARE:
            return self.triple.n
        if self.kind == TerminalKind.STEIN:
            return self.stein.order
        return 0


class ReductionChain(_Frozen):
    original: PopovTriple
    steps: Tuple[ReductionStep, ...] = ()
    terminal: TerminalEquation

    @property
    def reduction_steps(self) -> Tuple[ReductionStep, ...]:
        return tuple(step for step in self.steps if step.reduces_state)


class SolutionFamily(_Frozen):
    """Affine family {base + Σ ξᵢ basisᵢ}; an empty basis is an isolated solution"""

    base: Matrix
    basis: Tuple[Matrix, ...] = ()
    stabilizing: Optional[bool] = None

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def member(self, params: Sequence[float] = ()) -> np.ndarray:
        params = list(params)
        if len(params) != self.dimension:
            raise ValueError(f"expected {self.dimension} parameters, got {len(params)}")
        X = np.array(self.base, dtype=float)
        for xi, H in zip(params, self.basis):
            X = X + xi * H
        return X


class SolutionSet(_Frozen):
    families: Tuple[SolutionFamily, ...] = ()
    # False when solutions outside the listed families may exist
    complete: bool = True

    @property
    def is_empty(self) -> bool:
        return len(self.families) == 0


class SteinStatus(str, Enum):
    UNIQUE = "Unique"
    FAMILY = "Family"
    INCONSISTENT = "Inconsistent"


class SteinSolveReport(_Frozen):
    status: SteinStatus
    dimension: int = 0
    solution: Optional[SolutionSet] = None


class PencilPair(_Frozen):
    M: Matrix
    N: Matrix

    @property
    def size(self) -> int:
        return self.M.shape[0]


class ClosedLoopReport(_Frozen):
    top_left_matches: bool
    zero_column_block: bool
    spectrum_contained: bool

    @property
    def block_form_holds(self) -> bool:
        return self.top_left_matches and self.zero_column_block


class Diagnosis(_Frozen):
    pencil_regular: bool
    N_singular: bool
    R_singular: bool
    A0_singular: bool
    rank_R: int
    rank_RX: Optional[int] = None
    closed_loop_singular_predicted: Optional[bool] = None
    closed_loop_singular_observed: Optional[bool] = None
