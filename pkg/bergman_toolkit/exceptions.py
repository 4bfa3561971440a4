"""
Bergman Toolkit - Errors
"""


class BergmanToolkitError(Exception):
    """Base class for every error raised by the toolkit"""


class DimensionMismatchError(BergmanToolkitError, ValueError):
    """Operands live in different ambient dimensions"""


class InvalidCoordinateError(BergmanToolkitError, ValueError):
    """Coordinate index outside 1..n, or an illegal pair such as i == j"""


class PolynomialParseError(BergmanToolkitError, ValueError):
    """Polynomial literal does not follow the grammar"""

    def __init__(self, message: str, text: str = "", position: int = -1):
        self.text = text
        self.position = position
        if position >= 0:
            message = f"{message} at position {position} in {text!r}"
        super().__init__(message)


class SubmoduleDegeneracyError(BergmanToolkitError):
    """Gram matrix of the generating set is numerically singular"""

    def __init__(self, message: str, min_pivot: float = 0.0, max_pivot: float = 0.0):
        self.min_pivot = min_pivot
        self.max_pivot = max_pivot
        super().__init__(message)


class NonFiniteMatrixError(BergmanToolkitError, ValueError):
    """Matrix contains NaN or infinite entries"""
