"""Coefficient field: exact Gaussian rationals Q(i) and approximate complex floats.

Every scalar carries a backend tag.  The exact backend stores a pair of
arbitrary-precision rationals (gmpy2.mpq) and all its arithmetic is
bit-exact; the float backend stores a pair of doubles and compares with a
single configurable epsilon (relative once magnitudes exceed 1).

The three capabilities the factorisation algorithms need from the field are
arithmetic, root extraction of monic commutative polynomials, and ordering
by real part.  Root extraction on the exact backend is restricted to roots
that are themselves Gaussian rationals (closed forms up to degree 2, sympy
factorisation over Q(i) beyond); anything else raises
IrreducibleOverBackend so the caller can switch backends.
"""

from __future__ import annotations

import cmath
from fractions import Fraction

import gmpy2
from gmpy2 import mpq, mpz

from .errors import IrreducibleOverBackend

_FLOAT_EPS = 1e-9


def set_float_epsilon(eps: float) -> None:
    global _FLOAT_EPS
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    _FLOAT_EPS = eps


def float_epsilon() -> float:
    return _FLOAT_EPS


def _close(x: float, y: float) -> bool:
    # absolute below 1, relative above
    scale = max(1.0, abs(x), abs(y))
    return abs(x - y) <= _FLOAT_EPS * scale


class Scalar:
    """Element of the coefficient field C, tagged exact or float."""

    __slots__ = ("re", "im", "exact")

    def __init__(self, re=0, im=0, exact: bool = True):
        if exact:
            self.re = mpq(re)
            self.im = mpq(im)
        else:
            self.re = float(re)
            self.im = float(im)
        self.exact = exact

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(exact: bool = True) -> "Scalar":
        return Scalar(0, 0, exact)

    @staticmethod
    def one(exact: bool = True) -> "Scalar":
        return Scalar(1, 0, exact)

    @staticmethod
    def i(exact: bool = True) -> "Scalar":
        return Scalar(0, 1, exact)

    @staticmethod
    def from_rational(q, exact: bool = True) -> "Scalar":
        return Scalar(q, 0, exact)

    @staticmethod
    def from_complex(z: complex) -> "Scalar":
        return Scalar(z.real, z.imag, exact=False)

    @staticmethod
    def coerce(value, exact: bool = True) -> "Scalar":
        if isinstance(value, Scalar):
            return value
        if isinstance(value, complex):
            return Scalar.from_complex(value)
        if isinstance(value, (int, Fraction)) or type(value) is type(mpq(0)):
            return Scalar(value, 0, exact)
        if isinstance(value, float):
            return Scalar(value, 0, exact=False)
        raise TypeError(f"cannot coerce {value!r} to Scalar")

    def to_float(self) -> "Scalar":
        return self if not self.exact else Scalar(float(self.re), float(self.im), exact=False)

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    # -- arithmetic ---------------------------------------------------

    def _pair(self, other: "Scalar") -> tuple["Scalar", "Scalar"]:
        if self.exact == other.exact:
            return self, other
        return self.to_float(), other.to_float()

    def __add__(self, other):
        other = Scalar.coerce(other, self.exact)
        a, b = self._pair(other)
        return Scalar(a.re + b.re, a.im + b.im, a.exact)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.re, -self.im, self.exact)

    def __sub__(self, other):
        return self + (-Scalar.coerce(other, self.exact))

    def __rsub__(self, other):
        return Scalar.coerce(other, self.exact) - self

    def __mul__(self, other):
        other = Scalar.coerce(other, self.exact)
        a, b = self._pair(other)
        return Scalar(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re, a.exact)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Scalar.coerce(other, self.exact)
        a, b = self._pair(other)
        n = b.re * b.re + b.im * b.im
        if b.is_zero():
            raise ZeroDivisionError("scalar division by zero")
        return Scalar((a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n, a.exact)

    def __rtruediv__(self, other):
        return Scalar.coerce(other, self.exact) / self

    def conj(self) -> "Scalar":
        return Scalar(self.re, -self.im, self.exact)

    def __pow__(self, k: int) -> "Scalar":
        if k < 0:
            return Scalar.one(self.exact) / self ** (-k)
        out = Scalar.one(self.exact)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- predicates ---------------------------------------------------

    def is_zero(self) -> bool:
        if self.exact:
            return self.re == 0 and self.im == 0
        return _close(self.re, 0.0) and _close(self.im, 0.0)

    def __eq__(self, other) -> bool:
        try:
            other = Scalar.coerce(other, self.exact)
        except TypeError:
            return NotImplemented
        a, b = self._pair(other)
        if a.exact:
            return a.re == b.re and a.im == b.im
        return _close(a.re, b.re) and _close(a.im, b.im)

    __hash__ = None  # tolerance-based float equality is not hashable

    def is_real(self) -> bool:
        if self.exact:
            return self.im == 0
        return _close(self.im, 0.0)

    def is_positive_integer(self) -> bool:
        if not self.is_real():
            return False
        if self.exact:
            return self.re > 0 and self.re.denominator == 1
        r = round(self.re)
        return r > 0 and _close(self.re, r)

    def magnitude_bound(self):
        """|re| + |im|, an upper bound on the modulus (exact rational)."""
        if self.exact:
            return abs(self.re) + abs(self.im)
        return abs(self.re) + abs(self.im)

    # -- rendering ----------------------------------------------------

    def _num_str(self, q) -> str:
        return str(q)

    def __str__(self) -> str:
        if self.exact:
            re_z, im_z = self.re == 0, self.im == 0
        else:
            re_z, im_z = self.re == 0.0, self.im == 0.0
        if im_z:
            return self._num_str(self.re)
        if self.im == 1:
            im_part = "i"
        elif self.im == -1:
            im_part = "-i"
        else:
            im_part = f"{self._num_str(self.im)}*i"
        if re_z:
            return im_part
        sign = "+" if (self.im > 0 if self.exact else self.im > 0.0) else "-"
        mag = im_part.lstrip("-")
        return f"{self._num_str(self.re)}{sign}{mag}"

    def __repr__(self) -> str:
        tag = "exact" if self.exact else "float"
        return f"Scalar({self}, {tag})"


def re_less(a: Scalar, b: Scalar) -> bool:
    """Order by real part, ties broken by imaginary part ascending."""
    a, b = a._pair(b)
    if a.exact:
        if a.re != b.re:
            return a.re < b.re
        return a.im < b.im
    if not _close(a.re, b.re):
        return a.re < b.re
    if _close(a.im, b.im):
        return False
    return a.im < b.im


def _sort_key(s: Scalar):
    return (float(s.re), float(s.im))


def sorted_by_re(values: list[Scalar]) -> list[Scalar]:
    out = list(values)
    out.sort(key=_sort_key)
    # float keys respect the exact order for exact scalars only up to double
    # rounding; fall back to insertion-style pass with re_less for safety
    for i in range(1, len(out)):
        j = i
        while j > 0 and re_less(out[j], out[j - 1]):
            out[j], out[j - 1] = out[j - 1], out[j]
            j -= 1
    return out


# ---------------------------------------------------------------------------
# commutative polynomials over C
# ---------------------------------------------------------------------------


class CPolynomial:
    """Univariate commutative polynomial, coefficients ascending by degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = [Scalar.coerce(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = cs

    @staticmethod
    def zero() -> "CPolynomial":
        return CPolynomial([])

    @staticmethod
    def constant(c) -> "CPolynomial":
        return CPolynomial([c])

    @staticmethod
    def x_minus(root: Scalar) -> "CPolynomial":
        return CPolynomial([-root, Scalar.one(root.exact)])

    @staticmethod
    def from_roots(roots) -> "CPolynomial":
        p = CPolynomial([Scalar.one(roots[0].exact if roots else True)])
        for r in roots:
            p = p * CPolynomial.x_minus(r)
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> Scalar:
        return self.coeffs[-1]

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == Scalar.one(self.coeffs[-1].exact)

    def monic(self) -> "CPolynomial":
        if self.is_zero():
            return self
        lc = self.coeffs[-1]
        return CPolynomial([c / lc for c in self.coeffs])

    def __eq__(self, other) -> bool:
        if not isinstance(other, CPolynomial):
            return NotImplemented
        if len(self.coeffs) != len(other.coeffs):
            return False
        return all(a == b for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def __add__(self, other: "CPolynomial") -> "CPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        out = []
        for k in range(n):
            a = self.coeffs[k] if k < len(self.coeffs) else Scalar.zero()
            b = other.coeffs[k] if k < len(other.coeffs) else Scalar.zero()
            out.append(a + b)
        return CPolynomial(out)

    def __neg__(self) -> "CPolynomial":
        return CPolynomial([-c for c in self.coeffs])

    def __sub__(self, other: "CPolynomial") -> "CPolynomial":
        return self + (-other)

    def __mul__(self, other) -> "CPolynomial":
        if isinstance(other, Scalar):
            return CPolynomial([c * other for c in self.coeffs])
        if self.is_zero() or other.is_zero():
            return CPolynomial.zero()
        out = [Scalar.zero(self.coeffs[0].exact) for _ in range(len(self.coeffs) + len(other.coeffs) - 1)]
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return CPolynomial(out)

    def divmod(self, other: "CPolynomial") -> tuple["CPolynomial", "CPolynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Scalar.zero() for _ in range(max(0, len(rem) - len(other.coeffs) + 1))]
        d = other.degree
        lc = other.leading()
        while len(rem) - 1 >= d and rem:
            k = len(rem) - 1 - d
            c = rem[-1] / lc
            q[k] = c
            for j, b in enumerate(other.coeffs):
                rem[k + j] = rem[k + j] - c * b
            while rem and rem[-1].is_zero():
                rem.pop()
        return CPolynomial(q), CPolynomial(rem)

    def gcd(self, other: "CPolynomial") -> "CPolynomial":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        return a.monic() if not a.is_zero() else a

    def egcd(self, other: "CPolynomial"):
        """Return (u, v, g) with self*u + other*v = g, g monic gcd."""
        a, b = self, other
        ua, va = CPolynomial([Scalar.one()]), CPolynomial.zero()
        ub, vb = CPolynomial.zero(), CPolynomial([Scalar.one()])
        while not b.is_zero():
            q, r = a.divmod(b)
            a, b = b, r
            ua, ub = ub, ua - q * ub
            va, vb = vb, va - q * vb
        if a.is_zero():
            return ua, va, a
        lc = a.leading()
        inv = Scalar.one(lc.exact) / lc
        return ua * inv, va * inv, a * inv

    def eval(self, z: Scalar) -> Scalar:
        out = Scalar.zero(z.exact)
        for c in reversed(self.coeffs):
            out = out * z + c
        return out

    def shifted(self, c: Scalar) -> "CPolynomial":
        """p(x + c), by Horner on (x + c)."""
        out = CPolynomial.zero()
        xc = CPolynomial([c, Scalar.one(c.exact)])
        for a in reversed(self.coeffs):
            out = out * xc + CPolynomial.constant(a)
        return out

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c.is_zero():
                continue
            if k == 0:
                parts.append(f"({c})")
            elif k == 1:
                parts.append(f"({c})*x")
            else:
                parts.append(f"({c})*x^{k}")
        return " + ".join(parts)

    __repr__ = __str__


# ---------------------------------------------------------------------------
# root extraction
# ---------------------------------------------------------------------------


def _rational_sqrt(q) -> "mpq | None":
    """Exact square root of a non-negative rational, or None."""
    if q < 0:
        return None
    num, den = mpz(q.numerator), mpz(q.denominator)
    if not (gmpy2.is_square(num) and gmpy2.is_square(den)):
        return None
    return mpq(gmpy2.isqrt(num), gmpy2.isqrt(den))


def gaussian_sqrt(c: Scalar) -> "Scalar | None":
    """Square root of c inside Q(i) if it exists, else None (exact backend)."""
    a, b = c.re, c.im
    if b == 0:
        if a >= 0:
            r = _rational_sqrt(a)
            return None if r is None else Scalar(r, 0)
        r = _rational_sqrt(-a)
        return None if r is None else Scalar(0, r)
    norm = _rational_sqrt(a * a + b * b)
    if norm is None:
        return None
    x2 = (a + norm) / 2
    x = _rational_sqrt(x2)
    if x is None or x == 0:
        return None
    return Scalar(x, b / (2 * x))


def _roots_quadratic_exact(p: CPolynomial) -> list[Scalar]:
    b, c = p.coeffs[1], p.coeffs[0]
    disc = b * b - Scalar(4) * c
    s = gaussian_sqrt(disc)
    if s is None:
        raise IrreducibleOverBackend(
            f"quadratic discriminant {disc} has no Gaussian-rational square root"
        )
    half = Scalar(mpq(1, 2))
    return [(-b + s) * half, (-b - s) * half]


def _roots_exact_sympy(p: CPolynomial) -> list[Scalar]:
    import sympy

    z = sympy.Symbol("z")
    expr = sympy.Integer(0)
    for k, c in enumerate(p.coeffs):
        coeff = sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(
            c.im.numerator, c.im.denominator
        )
        expr += coeff * z**k
    poly = sympy.Poly(expr, z, domain="QQ_I")
    _, factors = poly.factor_list()
    roots: list[Scalar] = []
    for fac, mult in factors:
        if fac.degree() != 1:
            raise IrreducibleOverBackend(
                f"factor {fac.as_expr()} of degree {fac.degree()} is irreducible over Q(i)"
            )
        cs = fac.all_coeffs()
        root = -cs[1] / cs[0]
        re, im = root.as_real_imag()
        s = Scalar(mpq(re.p, re.q), mpq(im.p, im.q))
        roots.extend([s] * mult)
    return roots


def _roots_float(p: CPolynomial) -> list[Scalar]:
    import numpy as np

    cs = [c.to_complex() for c in reversed(p.coeffs)]
    return [Scalar.from_complex(complex(z)) for z in np.roots(cs)]


def roots_of(p: CPolynomial) -> list[Scalar]:
    """All roots of a monic non-constant polynomial, with multiplicity.

    Exact backend: closed forms through degree 2, factorisation over Q(i)
    beyond; raises IrreducibleOverBackend when p does not split in Q(i).
    Float backend: numpy companion-matrix roots.
    """
    if p.degree < 1:
        raise ValueError("roots_of requires a non-constant polynomial")
    if not p.is_monic():
        raise ValueError("roots_of requires a monic polynomial")
    if not p.coeffs[0].exact or any(not c.exact for c in p.coeffs):
        return _roots_float(p)
    if p.degree == 1:
        return [-p.coeffs[0]]
    if p.degree == 2:
        return _roots_quadratic_exact(p)
    return _roots_exact_sympy(p)


def gcd_shifted_coprime(g0: CPolynomial, h0: CPolynomial, m: int, shift=1) -> bool:
    """Coprimality test for the Hensel precondition.

    For m = 1: true iff gcd(g0(x + n*shift), h0(x)) = 1 for all integers
    n > 0; checked root-free by a bounded gcd scan (the shift cannot exceed
    the sum of the two Cauchy root bounds).  For m > 1: plain coprimality.
    The optional ``shift`` is the per-stage translation step (1/b over a
    ramified base).
    """
    if g0.is_zero() or h0.is_zero():
        return False
    if m > 1:
        return g0.gcd(h0).degree <= 0
    shift = mpq(shift)
    bound = mpq(2)
    for p in (g0.monic(), h0.monic()):
        mx = max((c.magnitude_bound() for c in p.coeffs[:-1]), default=mpq(0))
        bound += 1 + mpq(mx)
    n = 1
    while n * shift <= bound:
        shifted = g0.shifted(Scalar.from_rational(n * shift, g0.coeffs[0].exact))
        if shifted.gcd(h0).degree > 0:
            return False
        n += 1
    return True
