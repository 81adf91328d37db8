"""Linear factorisation of differential polynomials and Jordan decomposition
of formal differential operators over Puiseux-series fields."""

from .errors import (
    CoprimalityViolation,
    HltError,
    IrreducibleOverBackend,
    NegativeValuation,
    NotIntegrable,
    NotMinimalSlope,
    NotUnipotent,
    ParseError,
    PrecisionExhausted,
    ResonanceError,
    SingularGauge,
)
from .scalars import CPolynomial, Scalar, gcd_shifted_coprime, re_less, roots_of
from .series import DEFAULT_PRECISION, Derivation, PuiseuxSeries, is_similar

__version__ = "0.1.0"

__all__ = [
    "CPolynomial",
    "CoprimalityViolation",
    "DEFAULT_PRECISION",
    "Derivation",
    "HltError",
    "IrreducibleOverBackend",
    "NegativeValuation",
    "NotIntegrable",
    "NotMinimalSlope",
    "NotUnipotent",
    "ParseError",
    "PrecisionExhausted",
    "PuiseuxSeries",
    "ResonanceError",
    "Scalar",
    "SingularGauge",
    "gcd_shifted_coprime",
    "is_similar",
    "re_less",
    "roots_of",
]
