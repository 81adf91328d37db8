"""Truncated formal Puiseux series C((t^(1/b))) and the derivation family mu*s^m*d/ds.

A series is stored densely on the exponent lattice (1/b)*Z between its
leading exponent k0 and its precision bound P (exponents are integers in
units of 1/b throughout; t-exponents are k/b).  Coefficients at exponents
>= P are unknown; everything else is known exactly.  P = None marks an
exact Laurent polynomial (all unstored coefficients are genuinely zero),
which is what literal inputs produce; truncated results always carry a
finite P propagated pessimistically, so no operation ever fabricates an
unknown coefficient.

The base derivation family is delta_m = t^m d/dt on C((t)).  Ramifying to
C((s)), s = t^(1/q), and conjugating by powers of s produces the general
member mu*s^m*d/ds, which is what shearing a differential polynomial
requires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpq

from .errors import NotIntegrable, PrecisionExhausted
from .scalars import Scalar

DEFAULT_PRECISION = 48  # coefficient slots past the leading exponent


@dataclass(frozen=True)
class Derivation:
    """The derivation mu * s^m * d/ds acting on C((s)), s = t^(1/b)."""

    mu: object  # rational scale, stored as gmpy2.mpq
    m: int
    b: int

    @staticmethod
    def delta_m(m: int) -> "Derivation":
        """t^m d/dt on the unramified field."""
        return Derivation(mpq(1), m, 1)

    @staticmethod
    def canonical(b: int) -> "Derivation":
        """t d/dt extended to C((t^(1/b))): (1/b) s d/ds."""
        return Derivation(mpq(1, b), 1, b)

    def ramified(self, q: int) -> "Derivation":
        """The same derivation viewed on C((s^(1/q)))."""
        if q == 1:
            return self
        return Derivation(self.mu / q, q * (self.m - 1) + 1, self.b * q)

    def sheared(self, e: int) -> "Derivation":
        """Conjugation by s^e: the derivation seen by X = s^(-e) x."""
        return Derivation(self.mu, self.m - e, self.b)

    def monomial_factor(self, j: int):
        """d(s^j) = (mu*j) * s^(j+m-1); returns the rational factor mu*j."""
        return self.mu * j

    def is_regular_canonical(self) -> bool:
        return self.m == 1 and self.mu == mpq(1, self.b)


def _pmin(*precs):
    vals = [p for p in precs if p is not None]
    return min(vals) if vals else None


class PuiseuxSeries:
    """Truncated element of C((t^(1/b))); immutable."""

    __slots__ = ("b", "k0", "coeffs", "prec")

    def __init__(self, b: int, k0: int, coeffs, prec: int | None = None):
        cs = [c if isinstance(c, Scalar) else Scalar.coerce(c) for c in coeffs]
        if prec is not None and cs:
            keep = prec - k0
            if keep < len(cs):
                cs = cs[: max(keep, 0)]
        while cs and cs[-1].is_zero():
            cs.pop()
        lead = 0
        while lead < len(cs) and cs[lead].is_zero():
            lead += 1
        if lead:
            cs = cs[lead:]
            k0 += lead
        if not cs:
            k0 = 0
        self.b = b
        self.k0 = k0
        self.coeffs = tuple(cs)
        self.prec = prec

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(b: int = 1, prec: int | None = None) -> "PuiseuxSeries":
        return PuiseuxSeries(b, 0, (), prec)

    @staticmethod
    def one(b: int = 1, prec: int | None = None) -> "PuiseuxSeries":
        return PuiseuxSeries(b, 0, (Scalar.one(),), prec)

    @staticmethod
    def monomial(c, k: int, b: int = 1, prec: int | None = None) -> "PuiseuxSeries":
        return PuiseuxSeries(b, k, (Scalar.coerce(c),), prec)

    @staticmethod
    def from_terms(terms: dict, b: int = 1, prec: int | None = None) -> "PuiseuxSeries":
        """From a map {exponent in units 1/b: coefficient}."""
        if not terms:
            return PuiseuxSeries.zero(b, prec)
        k0 = min(terms)
        k1 = max(terms)
        cs = [Scalar.zero() for _ in range(k1 - k0 + 1)]
        for k, c in terms.items():
            cs[k - k0] = Scalar.coerce(c)
        return PuiseuxSeries(b, k0, cs, prec)

    @staticmethod
    def from_t_terms(terms: dict, prec_slots: int | None = None) -> "PuiseuxSeries":
        """From a map {rational t-exponent: coefficient}; picks the ramification.

        ``prec_slots``, when given, bounds the window to that many slots past
        the leading exponent; otherwise the result is an exact polynomial.
        """
        exps = {Fraction(e): c for e, c in terms.items()}
        b = 1
        for e in exps:
            b = math.lcm(b, e.denominator)
        lattice = {int(e * b): Scalar.coerce(c) for e, c in exps.items()}
        s = PuiseuxSeries.from_terms(lattice, b)
        if prec_slots is not None and not s.is_zero():
            s = s.truncate(s.k0 + prec_slots)
        return s

    @staticmethod
    def constant(c, b: int = 1, prec: int | None = None) -> "PuiseuxSeries":
        return PuiseuxSeries.monomial(c, 0, b, prec)

    # -- inspection -------------------------------------------------------

    def is_zero(self) -> bool:
        """Zero to precision: every stored coefficient vanishes."""
        return not self.coeffs

    def valuation(self) -> int | None:
        """Leading exponent (units 1/b); None when zero to precision."""
        return self.k0 if self.coeffs else None

    def _vlow(self) -> int | None:
        """Lower bound on the valuation; None means +infinity (exact zero)."""
        if self.coeffs:
            return self.k0
        return self.prec

    def known(self, k: int) -> bool:
        return self.prec is None or k < self.prec

    def coeff(self, k: int) -> Scalar:
        if not self.known(k):
            raise PrecisionExhausted(f"coefficient at exponent {k}/{self.b} is beyond precision")
        if self.coeffs and self.k0 <= k < self.k0 + len(self.coeffs):
            return self.coeffs[k - self.k0]
        return Scalar.zero()

    def constant_term(self) -> Scalar:
        return self.coeff(0)

    def terms(self):
        """Iterate (exponent, coefficient) over stored non-zero terms."""
        for i, c in enumerate(self.coeffs):
            if not c.is_zero():
                yield self.k0 + i, c

    def t_valuation(self) -> Fraction | None:
        v = self.valuation()
        return None if v is None else Fraction(v, self.b)

    def is_constant(self) -> bool:
        """No stored term away from exponent 0."""
        return all(k == 0 for k, _ in self.terms())

    # -- ramification -----------------------------------------------------

    def ramify(self, q: int) -> "PuiseuxSeries":
        """The same series viewed in C((s^(1/q))): exponents scale by q."""
        if q == 1:
            return self
        if q < 1:
            raise ValueError("ramification index must be positive")
        if not self.coeffs:
            return PuiseuxSeries(self.b * q, 0, (), None if self.prec is None else self.prec * q)
        cs = []
        for i, c in enumerate(self.coeffs):
            if i:
                cs.extend([Scalar.zero()] * (q - 1))
            cs.append(c)
        return PuiseuxSeries(
            self.b * q, self.k0 * q, cs, None if self.prec is None else self.prec * q
        )

    def lift_to(self, b_new: int) -> "PuiseuxSeries":
        if b_new % self.b:
            raise ValueError(f"cannot lift ramification {self.b} to {b_new}")
        return self.ramify(b_new // self.b)

    def _common(self, other: "PuiseuxSeries"):
        b = math.lcm(self.b, other.b)
        return self.lift_to(b), other.lift_to(b)

    # -- ring operations ----------------------------------------------------

    def __add__(self, other) -> "PuiseuxSeries":
        other = _coerce_series(other, self.b)
        a, o = self._common(other)
        prec = _pmin(a.prec, o.prec)
        if not a.coeffs:
            return PuiseuxSeries(o.b, o.k0, o.coeffs, prec)
        if not o.coeffs:
            return PuiseuxSeries(a.b, a.k0, a.coeffs, prec)
        k0 = min(a.k0, o.k0)
        k1 = max(a.k0 + len(a.coeffs), o.k0 + len(o.coeffs))
        cs = [Scalar.zero() for _ in range(k1 - k0)]
        for i, c in enumerate(a.coeffs):
            cs[a.k0 - k0 + i] = c
        for i, c in enumerate(o.coeffs):
            cs[o.k0 - k0 + i] = cs[o.k0 - k0 + i] + c
        return PuiseuxSeries(a.b, k0, cs, prec)

    __radd__ = __add__

    def __neg__(self) -> "PuiseuxSeries":
        return PuiseuxSeries(self.b, self.k0, [-c for c in self.coeffs], self.prec)

    def __sub__(self, other) -> "PuiseuxSeries":
        return self + (-_coerce_series(other, self.b))

    def __rsub__(self, other) -> "PuiseuxSeries":
        return _coerce_series(other, self.b) - self

    def __mul__(self, other) -> "PuiseuxSeries":
        if isinstance(other, Scalar):
            return self.scale(other)
        other = _coerce_series(other, self.b)
        a, o = self._common(other)
        pa = None if a.prec is None else (None if o._vlow() is None else a.prec + o._vlow())
        po = None if o.prec is None else (None if a._vlow() is None else o.prec + a._vlow())
        prec = _pmin(pa, po)
        if not a.coeffs or not o.coeffs:
            return PuiseuxSeries.zero(a.b, prec)
        cs = [Scalar.zero() for _ in range(len(a.coeffs) + len(o.coeffs) - 1)]
        for i, ca in enumerate(a.coeffs):
            if ca.is_zero():
                continue
            for j, cb in enumerate(o.coeffs):
                cs[i + j] = cs[i + j] + ca * cb
        return PuiseuxSeries(a.b, a.k0 + o.k0, cs, prec)

    __rmul__ = __mul__

    def scale(self, c: Scalar) -> "PuiseuxSeries":
        if c.is_zero():
            return PuiseuxSeries.zero(self.b, self.prec)
        return PuiseuxSeries(self.b, self.k0, [c * x for x in self.coeffs], self.prec)

    def shift_exp(self, j: int) -> "PuiseuxSeries":
        """Multiply by the exact monomial s^j."""
        return PuiseuxSeries(
            self.b, self.k0 + j, self.coeffs, None if self.prec is None else self.prec + j
        )

    def invert(self, prec: int | None = None) -> "PuiseuxSeries":
        """Multiplicative inverse; window P - 2*v(a) (defaults applied for exact input)."""
        if not self.coeffs:
            raise ZeroDivisionError("cannot invert a series that is zero to precision")
        v = self.k0
        if self.prec is None and len(self.coeffs) == 1 and prec is None:
            # exact monomial: the inverse is again an exact monomial
            c = self.coeffs[0]
            return PuiseuxSeries.monomial(Scalar.one(c.exact) / c, -v, self.b)
        if prec is None:
            prec = (self.prec - 2 * v) if self.prec is not None else (-v + DEFAULT_PRECISION)
        slots = prec + v  # result window is [-v, prec)
        if slots <= 0:
            raise PrecisionExhausted("no coefficient slots available for inversion")
        a = self.coeffs
        lead = a[0]
        inv_lead = Scalar.one(lead.exact) / lead
        out = [inv_lead]
        for j in range(1, slots):
            acc = Scalar.zero(lead.exact)
            top = min(j, len(a) - 1)
            for i in range(1, top + 1):
                acc = acc + a[i] * out[j - i]
            out.append(-acc * inv_lead)
        return PuiseuxSeries(self.b, -v, out, prec)

    def __truediv__(self, other) -> "PuiseuxSeries":
        other = _coerce_series(other, self.b)
        a, o = self._common(other)
        return a * o.invert()

    def __pow__(self, k: int) -> "PuiseuxSeries":
        if k < 0:
            return self.invert() ** (-k)
        out = PuiseuxSeries.one(self.b)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def truncate(self, prec: int) -> "PuiseuxSeries":
        new_prec = prec if self.prec is None else min(self.prec, prec)
        return PuiseuxSeries(self.b, self.k0, self.coeffs, new_prec)

    # -- differential structure ----------------------------------------------

    def derive(self, d: Derivation) -> "PuiseuxSeries":
        """Apply mu*s^m*d/ds: the monomial rule s^j -> mu*j*s^(j+m-1)."""
        if d.b != self.b:
            raise ValueError(f"derivation ramification {d.b} != series ramification {self.b}")
        shift = d.m - 1
        prec = None if self.prec is None else self.prec + shift
        cs = []
        for i, c in enumerate(self.coeffs):
            j = self.k0 + i
            cs.append(c * Scalar.from_rational(d.mu * j, c.exact))
        return PuiseuxSeries(self.b, self.k0 + shift, cs, prec)

    def integrate(self, d: Derivation, order: int = 1) -> "PuiseuxSeries":
        """y with d^order(y) = self, for regular derivations (m = 1).

        Coefficient rule y_j = a_j / (mu*j)^order for j != 0; a non-zero
        constant term is the classical obstruction.
        """
        if d.m != 1:
            raise ValueError("formal integration implemented for m = 1 derivations only")
        if d.b != self.b:
            raise ValueError(f"derivation ramification {d.b} != series ramification {self.b}")
        if order < 1:
            raise ValueError("order must be positive")
        if self.prec is not None and self.prec <= 0:
            raise PrecisionExhausted("constant-term obstruction is beyond available precision")
        cs = []
        for i, c in enumerate(self.coeffs):
            j = self.k0 + i
            if j == 0:
                if not c.is_zero():
                    raise NotIntegrable(f"non-zero constant term {c} obstructs integration")
                cs.append(c)
            else:
                f = Scalar.from_rational(d.mu * j, c.exact) ** order
                cs.append(c / f)
        return PuiseuxSeries(self.b, self.k0, cs, self.prec)

    # -- comparison / rendering ------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, (PuiseuxSeries, int, Scalar)):
            return NotImplemented
        return (self - _coerce_series(other, self.b)).is_zero()

    __hash__ = None

    def equal_to_precision(self, other: "PuiseuxSeries", t_prec: Fraction | int) -> bool:
        """Agree on every exponent strictly below t_prec (in t-units)."""
        a, o = self._common(_coerce_series(other, self.b))
        d = a - o
        if d.is_zero():
            return True
        return Fraction(d.valuation(), d.b) >= Fraction(t_prec)

    def exponent_str(self, k: int) -> str:
        e = Fraction(k, self.b)
        if e.denominator == 1:
            return str(e.numerator)
        return f"({e})"

    def to_text(self) -> str:
        if not self.coeffs:
            return "0"
        parts: list[str] = []
        for k, c in self.terms():
            e = Fraction(k, self.b)
            neg = False
            purely_real = c.is_real()
            purely_imag = (c.re == 0) if c.exact else abs(c.re) <= 1e-12
            if purely_real and (c.re < 0 if c.exact else c.re < 0.0):
                neg, c = True, -c
            elif purely_imag and (c.im < 0 if c.exact else c.im < 0.0):
                neg, c = True, -c
            cstr = str(c)
            if "+" in cstr or "-" in cstr[1:]:
                cstr = f"({cstr})"
            if e == 0:
                text = cstr
            else:
                base = "t" if e == 1 else f"t^{self.exponent_str(k)}"
                text = base if cstr == "1" else f"{cstr}*{base}"
            if not parts:
                parts.append(f"-{text}" if neg else text)
            else:
                parts.append(f"- {text}" if neg else f"+ {text}")
        return " ".join(parts)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        p = "exact" if self.prec is None else f"O(t^{Fraction(self.prec, self.b)})"
        return f"<{self.to_text()} + {p}; b={self.b}>"


def _coerce_series(value, b: int) -> PuiseuxSeries:
    if isinstance(value, PuiseuxSeries):
        return value
    if isinstance(value, (int, Scalar)):
        return PuiseuxSeries.constant(Scalar.coerce(value), b)
    raise TypeError(f"cannot coerce {value!r} to PuiseuxSeries")


def is_similar(a: PuiseuxSeries, b: PuiseuxSeries) -> bool:
    """Whether a - b is a logarithmic derivative c^(-1) d(c), d = t d/dt.

    Over C((t^(1/b'))) the logarithmic derivatives are exactly the series
    with non-negative valuation whose constant term lies in (1/b')*Z: write
    c = s^k * u with u a unit; the s^k part contributes k/b' and the unit's
    contribution u^(-1)d(u) sweeps every series of positive valuation.
    """
    a2, b2 = a._common(_coerce_series(b, a.b))
    w = a2 - b2
    if w.is_zero():
        return True
    if w.valuation() < 0:
        return False
    c = w.coeff(0)
    ram = w.b
    if c.exact:
        return c.im == 0 and (c.re * ram).denominator == 1
    if abs(c.im) > 1e-9:
        return False
    scaled = c.re * ram
    return abs(scaled - round(scaled)) <= 1e-9 * max(1.0, abs(scaled))


def similarity_witness_log(a: PuiseuxSeries) -> tuple[int, PuiseuxSeries]:
    """For a similar to 0, return (k, u) with (s^k u)^(-1) d(s^k u) = a.

    u is the unit solving d(u) = tail * u, u(0) = 1, where tail is a minus
    its constant term and d is the canonical derivation of the series' field.
    """
    if a.is_zero():
        return 0, PuiseuxSeries.one(a.b, a.prec)
    if a.valuation() < 0 or not is_similar(a, PuiseuxSeries.zero(a.b)):
        raise ValueError(f"{a} is not similar to zero")
    c = a.coeff(0)
    k = int(c.re * a.b) if c.exact else round(float(c.re) * a.b)
    tail = a - PuiseuxSeries.constant(c, a.b)
    if tail.is_zero():
        return k, PuiseuxSeries.one(a.b, tail.prec)
    # solve d(u) = tail*u term by term; u_j = (b/j) * (tail*u)_j
    prec = tail.prec if tail.prec is not None else DEFAULT_PRECISION
    u_terms = {0: Scalar.one(c.exact)}
    tail_terms = dict(tail.terms())
    for j in range(1, max(prec, 1)):
        acc = Scalar.zero(c.exact)
        for kk, tc in tail_terms.items():
            if 0 <= j - kk and (j - kk) in u_terms:
                acc = acc + tc * u_terms[j - kk]
        if not acc.is_zero():
            u_terms[j] = acc * Scalar.from_rational(mpq(a.b, j), c.exact)
    u = PuiseuxSeries.from_terms(u_terms, a.b, prec)
    return k, u
