from typing import Optional


class RiccatiError(Exception):
    """Base class for all errors raised by the reduction library"""


class DimensionMismatch(RiccatiError, ValueError):
    pass


class NonFiniteMatrix(RiccatiError, ValueError):
    pass


class AsymmetryBeyondTolerance(RiccatiError):
    pass


class PopovNotPSD(RiccatiError):
    """Popov matrix has a negative eigenvalue below the tolerance"""

    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"Popov matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.6g})"
        )


class NotOrthonormal(RiccatiError):
    pass


class SingularTransform(RiccatiError):
    pass


class NotApplicable(RiccatiError):
    """A reduction step was requested whose preconditions do not hold"""


class PreconditionViolated(RiccatiError):
    pass


class NoRealSolutionFound(RiccatiError):
    pass


class InvariantViolation(RiccatiError):
    """A hard structural property failed; usually a rank misclassification"""


class LiftVerificationError(RiccatiError):
    pass


class DocumentError(RiccatiError):
    """Malformed triple or matrix document"""

    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


# malformed input rather than a failed computation
VALIDATION_ERRORS = (
    DocumentError,
    DimensionMismatch,
    NonFiniteMatrix,
    AsymmetryBeyondTolerance,
    PopovNotPSD,
    NotOrthonormal,
    SingularTransform,
)
