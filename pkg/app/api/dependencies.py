from fastapi import Depends, HTTPException
from functools import lru_cache
from typing import Tuple
import logging

from app.config import settings
from app.exceptions import VALIDATION_ERRORS, NoRealSolutionFound, RiccatiError
from app.models.riccati import PopovTriple, Tolerance
from app.models.schemas import TripleDocument
from app.services.riccati_service import RiccatiService
from app.utils import documents

logger = logging.getLogger(__name__)


@lru_cache()
def get_service() -> RiccatiService:
    return RiccatiService(settings)


def http_error(e: RiccatiError) -> HTTPException:
    """Map library errors to HTTP status codes"""
    if isinstance(e, VALIDATION_ERRORS):
        return HTTPException(status_code=422, detail=str(e))
    if isinstance(e, NoRealSolutionFound):
        return HTTPException(status_code=409, detail=str(e))
    logger.error(f"Internal error: {str(e)}")
    return HTTPException(status_code=500, detail=str(e))


def load_triple(
    document: TripleDocument,
    service: RiccatiService = Depends(get_service),
) -> Tuple[PopovTriple, Tolerance]:
    """Validated triple and effective tolerance for a request document"""
    tol = documents.document_tolerance(document, service.tol)
    try:
        return documents.to_triple(document, tol), tol
    except RiccatiError as e:
        raise http_error(e)
