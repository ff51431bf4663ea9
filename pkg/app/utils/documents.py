"""JSON documents for triples, candidate solutions and command results.

Floats are written by ``json`` with the shortest representation that reads
back to the same double, so every printed matrix re-parses bit-identically.
"""
from pathlib import Path
from typing import List, Optional, Union
import json

import numpy as np
from pydantic import BaseModel, ValidationError

from app.exceptions import DocumentError
from app.models.riccati import (
    Diagnosis,
    PopovTriple,
    ReductionChain,
    ResidualCheck,
    SolutionSet,
    TerminalKind,
    Tolerance,
)
from app.models.schemas import (
    DiagnosisResponse,
    FamilyResponse,
    MatrixDocument,
    ReduceResponse,
    SolveResponse,
    StepResponse,
    TerminalResponse,
    TripleDocument,
    VerifyResponse,
)
from app.services import popov
from app.utils import linalg


def _location(loc) -> str:
    name = ""
    for part in loc:
        name += f"[{part}]" if isinstance(part, int) else (f".{part}" if name else str(part))
    return name or "document"


def _validation_error(e: ValidationError) -> DocumentError:
    first = e.errors()[0]
    return DocumentError(first["msg"], _location(first["loc"]))


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(e.msg, f"line {e.lineno} column {e.colno}")


def parse_triple(text: str) -> TripleDocument:
    try:
        return TripleDocument.model_validate(_load_json(text))
    except ValidationError as e:
        raise _validation_error(e)


def parse_matrix(text: str) -> np.ndarray:
    """A candidate solution, either {"X": [[...]]} or a bare nested array"""
    data = _load_json(text)
    if isinstance(data, list):
        data = {"X": data}
    try:
        document = MatrixDocument.model_validate(data)
    except ValidationError as e:
        raise _validation_error(e)
    k = len(document.X)
    return linalg.as_matrix(document.X, rows=k, cols=k, name="X")


def _read_text(path: Union[str, Path]) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise DocumentError(f"not UTF-8 text ({e.reason})", f"byte {e.start}")


def load_triple(path: Union[str, Path]) -> TripleDocument:
    return parse_triple(_read_text(path))


def load_matrix(path: Union[str, Path]) -> np.ndarray:
    return parse_matrix(_read_text(path))


def to_triple(document: TripleDocument, tol: Tolerance) -> PopovTriple:
    n, m = document.n, document.m
    return popov.new_triple(
        linalg.as_matrix(document.A, n, n, "A"),
        linalg.as_matrix(document.B, n, m, "B"),
        linalg.as_matrix(document.Q, n, n, "Q"),
        linalg.as_matrix(document.R, m, m, "R"),
        None if document.S is None else linalg.as_matrix(document.S, n, m, "S"),
        tol,
    )


def document_tolerance(document: TripleDocument, base: Tolerance) -> Tolerance:
    if document.tol is None:
        return base
    return Tolerance(
        rel=document.tol.rel or base.rel,
        abs_residual=document.tol.abs_residual or base.abs_residual,
        floor=base.floor,
    )


def rows(M: np.ndarray) -> List[List[float]]:
    return np.asarray(M, dtype=float).tolist()


def triple_document(sigma: PopovTriple) -> TripleDocument:
    return TripleDocument(
        n=sigma.n, m=sigma.m,
        A=rows(sigma.A), B=rows(sigma.B), Q=rows(sigma.Q), R=rows(sigma.R), S=rows(sigma.S),
    )


def diagnosis_response(diagnosis: Diagnosis) -> DiagnosisResponse:
    return DiagnosisResponse(**diagnosis.model_dump())


def reduce_response(chain: ReductionChain) -> ReduceResponse:
    steps = [
        StepResponse(
            kind=step.kind.value,
            order=step.order,
            reduced_order=step.reduced_order,
            deficiency=step.deficiency,
            state_transform=rows(step.state_transform),
            input_transform=rows(step.input_transform),
            q11=rows(step.q11), q12=rows(step.q12), q22=rows(step.q22),
            result=triple_document(step.result) if step.result is not None else None,
        )
        for step in chain.steps
    ]
    terminal = chain.terminal
    response = TerminalResponse(kind=terminal.kind.value, order=terminal.order)
    if terminal.kind == TerminalKind.REGULAR_DARE:
        response.triple = triple_document(terminal.triple)
    elif terminal.kind == TerminalKind.STEIN:
        response.A0 = rows(terminal.stein.a0)
        response.Q0 = rows(terminal.stein.q0)
    return ReduceResponse(steps=steps, terminal=response)


def solve_response(solutions: SolutionSet, residuals: Optional[List[List[float]]] = None) -> SolveResponse:
    residuals = residuals or [[] for _ in solutions.families]
    return SolveResponse(
        families=[
            FamilyResponse(
                base=rows(family.base),
                basis=[rows(H) for H in family.basis],
                stabilizing=family.stabilizing,
                residuals=family_residuals,
            )
            for family, family_residuals in zip(solutions.families, residuals)
        ],
        complete=solutions.complete,
    )


def verify_response(check: ResidualCheck) -> VerifyResponse:
    return VerifyResponse(**check.model_dump())


def dumps(model: BaseModel) -> str:
    return json.dumps(model.model_dump(), indent=2)
