"""Recursive-descent parser for series, differential polynomials and matrices.

Grammar (whitespace insensitive):

    expr     := term (('+'|'-') term)*
    term     := unary (('*'|'/') unary)*
    unary    := ('-'|'+') unary | power
    power    := atom ('^' exponent)?
    exponent := INT | '-' INT | '(' '-'? INT ('/' INT)? ')'
    atom     := NUMBER | 'i' | 't' | 'x' | '(' expr ')' | matrix
    matrix   := '[' row (';' row)* ']'    row := expr (',' expr)*

Rational exponents are allowed on t only and imply ramification
(`t^(1/2)` lives in C((t^(1/2)))).  NUMBER accepts integers and decimal
literals; on the exact backend decimals are converted exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .diffop import DiffOperator
from .errors import ParseError
from .orepoly import OrePoly
from .scalars import Scalar
from .series import Derivation, PuiseuxSeries


@dataclass
class Session:
    """Per-invocation configuration: precision window, backend, derivation."""

    precision: int = 48
    backend: str = "exact"
    derivation_m: int = 1

    def __post_init__(self):
        if self.precision < 8:
            raise ValueError("precision must be at least 8")
        if self.derivation_m < 1:
            raise ValueError("derivation exponent must be at least 1")
        if self.backend not in ("exact", "float"):
            raise ValueError("backend must be 'exact' or 'float'")

    @property
    def exact(self) -> bool:
        return self.backend == "exact"

    def derivation(self, b: int = 1) -> Derivation:
        return Derivation.delta_m(self.derivation_m).ramified(b)


_SYMBOLS = set("+-*/^()[];,")


@dataclass
class _Token:
    kind: str  # 'num', 'ident', or the symbol itself
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    out: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _SYMBOLS:
            out.append(_Token(c, c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    seen_dot = True
                j += 1
            out.append(_Token("num", text[i:j], i))
            i = j
            continue
        if c.isalpha():
            j = i
            while j < n and text[j].isalnum():
                j += 1
            out.append(_Token("ident", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    out.append(_Token("end", "", n))
    return out


class _Value:
    """Either a differential polynomial in x or a matrix of series."""

    __slots__ = ("poly", "matrix")

    def __init__(self, poly: OrePoly | None = None, matrix=None):
        self.poly = poly
        self.matrix = matrix

    @property
    def is_matrix(self) -> bool:
        return self.matrix is not None


class _Parser:
    def __init__(self, text: str, session: Session):
        self.text = text
        self.session = session
        self.tokens = _tokenize(text)
        self.k = 0

    # -- token plumbing ---------------------------------------------------

    def peek(self) -> _Token:
        return self.tokens[self.k]

    def next(self) -> _Token:
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return self.next()

    def fail(self, message: str):
        raise ParseError(message, self.peek().pos)

    # -- value helpers -------------------------------------------------------

    def _series_const(self, c: Scalar) -> OrePoly:
        der = self.session.derivation(1)
        return OrePoly.constant(PuiseuxSeries.constant(c), der)

    def _unify(self, a: OrePoly, b: OrePoly) -> tuple[OrePoly, OrePoly]:
        bb = math.lcm(a.der.b, b.der.b)
        return a.lift_to_ramification(bb), b.lift_to_ramification(bb)

    def _as_series(self, v: _Value, what: str) -> PuiseuxSeries:
        if v.is_matrix or v.poly.degree > 0:
            self.fail(f"{what} must be a series (no x, no matrix)")
        if v.poly.is_zero():
            return PuiseuxSeries.zero(v.poly.der.b)
        return v.poly.coeffs[-1]

    # -- grammar -------------------------------------------------------------

    def parse(self) -> _Value:
        v = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.pos)
        return v

    def expr(self) -> _Value:
        v = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.next().kind
            w = self.term()
            if v.is_matrix or w.is_matrix:
                self.fail("matrices do not participate in arithmetic")
            a, b = self._unify(v.poly, w.poly)
            v = _Value(poly=a + b if op == "+" else a - b)
        return v

    def term(self) -> _Value:
        v = self.unary()
        while self.peek().kind in ("*", "/"):
            op = self.next().kind
            w = self.unary()
            if v.is_matrix or w.is_matrix:
                self.fail("matrices do not participate in arithmetic")
            a, b = self._unify(v.poly, w.poly)
            if op == "*":
                v = _Value(poly=a * b)
            else:
                if b.degree > 0:
                    self.fail("division by a polynomial in x is not defined")
                if b.is_zero():
                    self.fail("division by zero")
                den = b.coeffs[-1]
                inv = den.invert(
                    prec=None
                    if den.prec is None and len(den.coeffs) == 1
                    else -den.valuation() + self.session.precision * den.b
                )
                v = _Value(poly=a.left_mul_series(inv))
        return v

    def unary(self) -> _Value:
        tok = self.peek()
        if tok.kind in ("+", "-"):
            self.next()
            v = self.unary()
            if v.is_matrix:
                self.fail("matrices do not participate in arithmetic")
            return _Value(poly=-v.poly) if tok.kind == "-" else v
        return self.power()

    def power(self) -> _Value:
        base_tok = self.peek()
        v = self.atom()
        if self.peek().kind != "^":
            return v
        self.next()
        e = self.exponent()
        if v.is_matrix:
            self.fail("matrices cannot be raised to powers")
        p = v.poly
        if e.denominator != 1:
            if base_tok.kind == "ident" and base_tok.text == "t":
                der = self.session.derivation(e.denominator)
                mono = PuiseuxSeries.monomial(
                    Scalar.one(self.session.exact), e.numerator, e.denominator
                )
                return _Value(poly=OrePoly.constant(mono, der))
            self.fail("rational exponents are only allowed on t")
        k = int(e)
        if k >= 0:
            return _Value(poly=p**k)
        if p.degree > 0:
            self.fail("negative powers of x-polynomials are not defined")
        if p.is_zero():
            self.fail("negative power of zero")
        s = p.coeffs[-1]
        if len(s.coeffs) == 1 and s.prec is None:
            inv = s.invert()
        else:
            inv = s.invert(-s.valuation() + self.session.precision * s.b)
        return _Value(poly=OrePoly.constant(inv ** (-k), p.der))

    def exponent(self) -> Fraction:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            if "." in tok.text:
                raise ParseError("exponents must be integers or rationals", tok.pos)
            return Fraction(int(tok.text))
        if tok.kind == "-":
            self.next()
            num = self.expect("num")
            return -Fraction(int(num.text))
        if tok.kind == "(":
            self.next()
            sign = 1
            if self.peek().kind == "-":
                self.next()
                sign = -1
            num = self.expect("num")
            if "." in num.text:
                raise ParseError("exponents must be integers or rationals", num.pos)
            val = Fraction(int(num.text))
            if self.peek().kind == "/":
                self.next()
                den = self.expect("num")
                if "." in den.text:
                    raise ParseError("exponents must be integers or rationals", den.pos)
                val = val / int(den.text)
            self.expect(")")
            return sign * val
        raise ParseError("expected an exponent", tok.pos)

    def atom(self) -> _Value:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            if self.session.exact:
                c = Scalar.from_rational(Fraction(tok.text))
            else:
                c = Scalar(float(tok.text), 0.0, exact=False)
            return _Value(poly=self._series_const(c))
        if tok.kind == "ident":
            self.next()
            if tok.text == "i":
                return _Value(poly=self._series_const(Scalar.i(self.session.exact)))
            if tok.text == "t":
                der = self.session.derivation(1)
                mono = PuiseuxSeries.monomial(Scalar.one(self.session.exact), 1, 1)
                return _Value(poly=OrePoly.constant(mono, der))
            if tok.text == "x":
                return _Value(poly=OrePoly.x(self.session.derivation(1)))
            raise ParseError(f"unknown identifier {tok.text!r}", tok.pos)
        if tok.kind == "(":
            self.next()
            v = self.expr()
            self.expect(")")
            return v
        if tok.kind == "[":
            return self.matrix()
        raise ParseError(f"expected a value, found {tok.text or 'end of input'!r}", tok.pos)

    def matrix(self) -> _Value:
        self.expect("[")
        rows: list[list[PuiseuxSeries]] = []
        while True:
            row: list[PuiseuxSeries] = []
            while True:
                v = self.expr()
                row.append(self._as_series(v, "matrix entry"))
                if self.peek().kind == ",":
                    self.next()
                    continue
                break
            rows.append(row)
            if self.peek().kind == ";":
                self.next()
                continue
            break
        self.expect("]")
        if any(len(r) != len(rows) for r in rows):
            self.fail(f"matrix must be square; got rows of sizes {[len(r) for r in rows]}")
        return _Value(matrix=rows)


def parse_expression(text: str, session: Session | None = None):
    """Parse into a PuiseuxSeries, an OrePoly (degree >= 1) or a DiffOperator."""
    session = session or Session()
    v = _Parser(text, session).parse()
    if v.is_matrix:
        if session.derivation_m != 1:
            raise ParseError("matrix operators are defined for the regular derivation only")
        return DiffOperator(v.matrix)
    if v.poly.degree > 0:
        return v.poly
    if v.poly.is_zero():
        return PuiseuxSeries.zero(v.poly.der.b)
    return v.poly.coeffs[-1]
