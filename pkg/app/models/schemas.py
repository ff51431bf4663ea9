from pydantic import BaseModel, Field, model_validator
from typing import Annotated, List, Optional

FiniteFloat = Annotated[float, Field(allow_inf_nan=False)]
Rows = List[List[FiniteFloat]]


def _check_shape(name: str, rows: Rows, n_rows: int, n_cols: int):
    # [] stands for any matrix with a zero dimension
    if rows == [] and n_rows * n_cols == 0:
        return
    if len(rows) != n_rows:
        raise ValueError(f"{name}: expected {n_rows} rows, got {len(rows)}")
    for i, row in enumerate(rows):
        if len(row) != n_cols:
            raise ValueError(f"{name}[{i}]: expected {n_cols} entries, got {len(row)}")


class ToleranceOverride(BaseModel):
    rel: Optional[float] = Field(default=None, gt=0)
    abs_residual: Optional[float] = Field(default=None, gt=0)


class TripleDocument(BaseModel):
    """Popov triple as stored on disk and exchanged over HTTP"""

    n: int = Field(ge=0)
    m: int = Field(ge=0)
    A: Rows
    B: Rows
    Q: Rows
    R: Rows
    S: Optional[Rows] = None
    tol: Optional[ToleranceOverride] = None

    @model_validator(mode="after")
    def check_shapes(self):
        n, m = self.n, self.m
        _check_shape("A", self.A, n, n)
        _check_shape("B", self.B, n, m)
        _check_shape("Q", self.Q, n, n)
        _check_shape("R", self.R, m, m)
        if self.S is not None:
            _check_shape("S", self.S, n, m)
        return self


class MatrixDocument(BaseModel):
    X: Rows

    @model_validator(mode="after")
    def check_square(self):
        _check_shape("X", self.X, len(self.X), len(self.X))
        return self


class VerifyRequest(BaseModel):
    triple: TripleDocument
    X: Rows


class DiagnosisResponse(BaseModel):
    pencil_regular: bool
    N_singular: bool
    R_singular: bool
    A0_singular: bool
    rank_R: int
    rank_RX: Optional[int] = None
    closed_loop_singular_predicted: Optional[bool] = None
    closed_loop_singular_observed: Optional[bool] = None


class StepResponse(BaseModel):
    kind: str
    order: int
    reduced_order: int
    deficiency: int = 0
    state_transform: Rows
    input_transform: Rows
    q11: Rows = []
    q12: Rows = []
    q22: Rows = []
    result: Optional[TripleDocument] = None


class TerminalResponse(BaseModel):
    kind: str
    order: int
    triple: Optional[TripleDocument] = None
    A0: Optional[Rows] = None
    Q0: Optional[Rows] = None


class ReduceResponse(BaseModel):
    steps: List[StepResponse]
    terminal: TerminalResponse


class FamilyResponse(BaseModel):
    base: Rows
    basis: List[Rows] = []
    stabilizing: Optional[bool] = None
    residuals: List[float] = []


class SolveResponse(BaseModel):
    families: List[FamilyResponse]
    complete: bool = True


class VerifyResponse(BaseModel):
    residual: float
    kernel_ok: bool
    accepted: bool
