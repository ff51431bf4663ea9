from fastapi import APIRouter, Depends
from typing import Tuple
import logging

from app.api.dependencies import get_service, http_error, load_triple
from app.exceptions import RiccatiError
from app.models.riccati import PopovTriple, Tolerance
from app.models.schemas import (
    DiagnosisResponse,
    ReduceResponse,
    SolveResponse,
    VerifyRequest,
    VerifyResponse,
)
from app.services.riccati_service import RiccatiService
from app.utils import documents, linalg

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/diagnose", response_model=DiagnosisResponse)
def diagnose(
    loaded: Tuple[PopovTriple, Tolerance] = Depends(load_triple),
    service: RiccatiService = Depends(get_service),
):
    """Pencil regularity and singularity flags"""
    sigma, tol = loaded
    try:
        return documents.diagnosis_response(service.diagnose(sigma, tol))
    except RiccatiError as e:
        raise http_error(e)


@router.post("/reduce", response_model=ReduceResponse)
def reduce(
    loaded: Tuple[PopovTriple, Tolerance] = Depends(load_triple),
    service: RiccatiService = Depends(get_service),
):
    """Reduction chain down to the terminal equation"""
    sigma, tol = loaded
    try:
        return documents.reduce_response(service.reduce(sigma, tol))
    except RiccatiError as e:
        raise http_error(e)


@router.post("/solve", response_model=SolveResponse)
def solve(
    loaded: Tuple[PopovTriple, Tolerance] = Depends(load_triple),
    service: RiccatiService = Depends(get_service),
):
    """Complete solution set as affine families"""
    sigma, tol = loaded
    try:
        _, solutions = service.solve(sigma, tol)
        residuals = [service.member_residuals(sigma, family, tol) for family in solutions.families]
        return documents.solve_response(solutions, residuals)
    except RiccatiError as e:
        raise http_error(e)


@router.post("/verify", response_model=VerifyResponse)
def verify(
    request: VerifyRequest,
    service: RiccatiService = Depends(get_service),
):
    """Residual and kernel condition of a candidate solution"""
    try:
        tol = documents.document_tolerance(request.triple, service.tol)
        sigma = documents.to_triple(request.triple, tol)
        k = len(request.X)
        X = linalg.as_matrix(request.X, rows=k, cols=k, name="X")
        return documents.verify_response(service.verify(sigma, X, tol))
    except RiccatiError as e:
        raise http_error(e)
