"""Exception hierarchy with stable error codes for the CLI exit-code map."""

from __future__ import annotations


class HltError(Exception):
    """Base class for all library errors."""

    code = "internal"
    exit_code = 1


class ParseError(HltError):
    """Input text does not conform to the expression grammar."""

    code = "parse-error"
    exit_code = 2

    def __init__(self, message: str, position: int | None = None, line: int = 1):
        self.position = position
        self.line = line
        if position is not None:
            message = f"line {line}, column {position + 1}: {message}"
        super().__init__(message)


class IrreducibleOverBackend(HltError):
    """The exact backend cannot split a polynomial within Gaussian rationals.

    Switch to the float backend or supply roots externally.
    """

    code = "irreducible-over-backend"
    exit_code = 3


class PrecisionExhausted(HltError):
    """A computation needs more coefficient slots than the operands carry."""

    code = "precision-exhausted"
    exit_code = 4


class ResonanceError(HltError):
    """Block-splitting hit a singular order: the eigenvalue classes are not
    actually distinct (or precision is insufficient to separate them)."""

    code = "resonance"
    exit_code = 5


class NotUnipotent(HltError):
    """Unipotent normal form invoked on an operator violating its precondition."""

    code = "not-unipotent"
    exit_code = 6


class SingularGauge(HltError):
    """A gauge matrix is not invertible to the available precision."""

    code = "singular-gauge"
    exit_code = 7


class NotIntegrable(HltError):
    """Formal integration obstructed by a non-zero constant term."""

    code = "not-integrable"
    exit_code = 8


class NegativeValuation(HltError):
    """Reduction mod t applied to a polynomial with a pole in a coefficient."""

    code = "negative-valuation"
    exit_code = 9


class NotMinimalSlope(HltError):
    """Shear invoked with an exponent exceeding some coefficient slope."""

    code = "not-minimal-slope"
    exit_code = 10


class CoprimalityViolation(HltError):
    """Hensel lifting precondition gcd(g0(x+n), h0) = 1 fails."""

    code = "coprimality-violation"
    exit_code = 11


ERROR_CLASSES = [
    ParseError,
    IrreducibleOverBackend,
    PrecisionExhausted,
    ResonanceError,
    NotUnipotent,
    SingularGauge,
    NotIntegrable,
    NegativeValuation,
    NotMinimalSlope,
    CoprimalityViolation,
]
