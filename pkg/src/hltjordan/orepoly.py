"""Differential polynomials over a Puiseux-series field.

K{x, delta} is K[x] as an abelian group with multiplication twisted by
x*a = a*x + delta(a).  Polynomials are stored as f = sum a_i x^(n-i) with
the coefficients written on the left of the powers of x, leading
coefficient first.  The structural identities

    h(x) s^i           = s^i h(x + i*mu*s^(m-1))
    (s^d x)^k          = sum_j c_j s^(k*d + (m-1)*j) x^(k-j),  c_0 = 1

drive the change-of-variable machinery: reduction mod t, the shear
x = t^r X (which ramifies the field and twists the derivation) and the
translation x -> x - lambda*t^r used in the Newton-polygon loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import NegativeValuation, NotMinimalSlope, PrecisionExhausted
from .scalars import CPolynomial, Scalar
from .series import Derivation, PuiseuxSeries


class OrePoly:
    """f = a_0 x^n + a_1 x^(n-1) + ... + a_n over K{x, delta}."""

    __slots__ = ("coeffs", "der")

    def __init__(self, coeffs, der: Derivation):
        cs = []
        for c in coeffs:
            if isinstance(c, PuiseuxSeries):
                cs.append(c.lift_to(der.b) if c.b != der.b else c)
            else:
                cs.append(PuiseuxSeries.constant(Scalar.coerce(c), der.b))
        while cs and cs[0].is_zero():
            cs.pop(0)
        self.coeffs = tuple(cs)
        self.der = der

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero(der: Derivation) -> "OrePoly":
        return OrePoly((), der)

    @staticmethod
    def one(der: Derivation) -> "OrePoly":
        return OrePoly((PuiseuxSeries.one(der.b),), der)

    @staticmethod
    def x(der: Derivation) -> "OrePoly":
        return OrePoly((PuiseuxSeries.one(der.b), PuiseuxSeries.zero(der.b)), der)

    @staticmethod
    def constant(a: PuiseuxSeries, der: Derivation) -> "OrePoly":
        return OrePoly((a,), der)

    @staticmethod
    def linear_from_root(root: PuiseuxSeries, der: Derivation) -> "OrePoly":
        """x - root."""
        return OrePoly((PuiseuxSeries.one(der.b), -root), der)

    @staticmethod
    def from_roots(roots, der: Derivation) -> "OrePoly":
        """The left-to-right product (x - r_1)(x - r_2)...(x - r_k)."""
        f = OrePoly.one(der)
        for r in roots:
            f = f * OrePoly.linear_from_root(r, der)
        return f

    @staticmethod
    def from_cpolynomial(p: CPolynomial, der: Derivation) -> "OrePoly":
        cs = [PuiseuxSeries.constant(c, der.b) for c in reversed(p.coeffs)]
        return OrePoly(cs, der)

    # -- inspection -------------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> PuiseuxSeries:
        return self.coeffs[0]

    def is_monic(self) -> bool:
        return bool(self.coeffs) and (self.coeffs[0] - PuiseuxSeries.one(self.der.b)).is_zero()

    def coeff_of_power(self, k: int) -> PuiseuxSeries:
        """Coefficient of x^k."""
        n = self.degree
        if k < 0 or k > n:
            return PuiseuxSeries.zero(self.der.b)
        return self.coeffs[n - k]

    def __eq__(self, other) -> bool:
        if not isinstance(other, OrePoly):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    # -- ramification -----------------------------------------------------

    def lift_to_ramification(self, b_new: int) -> "OrePoly":
        if b_new == self.der.b:
            return self
        q, rem = divmod(b_new, self.der.b)
        if rem:
            raise ValueError(f"cannot lift ramification {self.der.b} to {b_new}")
        return OrePoly([c.ramify(q) for c in self.coeffs], self.der.ramified(q))

    # -- additive structure -------------------------------------------------

    def _check_der(self, other: "OrePoly") -> None:
        if self.der != other.der:
            raise ValueError(f"derivation mismatch: {self.der} vs {other.der}")

    def __add__(self, other: "OrePoly") -> "OrePoly":
        self._check_der(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = (PuiseuxSeries.zero(self.der.b),) * (n - len(self.coeffs)) + self.coeffs
        b = (PuiseuxSeries.zero(self.der.b),) * (n - len(other.coeffs)) + other.coeffs
        return OrePoly([x + y for x, y in zip(a, b)], self.der)

    def __neg__(self) -> "OrePoly":
        return OrePoly([-c for c in self.coeffs], self.der)

    def __sub__(self, other: "OrePoly") -> "OrePoly":
        return self + (-other)

    def left_mul_series(self, u: PuiseuxSeries) -> "OrePoly":
        """u * f; series coefficients multiply on the left, coefficientwise."""
        return OrePoly([u * c for c in self.coeffs], self.der)

    def shift_exponents(self, j: int) -> "OrePoly":
        """s^j * f (exact monomial on the left)."""
        return OrePoly([c.shift_exp(j) for c in self.coeffs], self.der)

    def monic(self) -> "OrePoly":
        """Left-normalise by the inverse of the leading coefficient."""
        if self.is_zero():
            raise ZeroDivisionError("zero polynomial has no monic normalisation")
        if self.is_monic():
            return self
        u = self.leading().invert()
        return self.left_mul_series(u)

    # -- multiplicative structure ---------------------------------------------

    def _x_times(self) -> "OrePoly":
        """x * f, from x*a = a*x + delta(a)."""
        shifted = self.coeffs + (PuiseuxSeries.zero(self.der.b),)
        out = list(shifted)
        for i, c in enumerate(self.coeffs):
            out[i + 1] = out[i + 1] + c.derive(self.der)
        return OrePoly(out, self.der)

    def __mul__(self, other: "OrePoly") -> "OrePoly":
        self._check_der(other)
        if self.is_zero() or other.is_zero():
            return OrePoly.zero(self.der)
        acc = OrePoly.zero(self.der)
        xg = other
        n = self.degree
        for k in range(n + 1):
            fk = self.coeffs[n - k]  # coefficient of x^k
            if not fk.is_zero():
                acc = acc + xg.left_mul_series(fk)
            if k < n:
                xg = xg._x_times()
        return acc

    def __pow__(self, k: int) -> "OrePoly":
        if k < 0:
            raise ValueError("negative powers are not defined in the Ore ring")
        out = OrePoly.one(self.der)
        for _ in range(k):
            out = out * self
        return out

    # -- substitutions -----------------------------------------------------

    def subst_x_plus(self, c: PuiseuxSeries) -> "OrePoly":
        """f(x + c) by Horner; substitution by x + c is a ring homomorphism."""
        if c.b != self.der.b:
            c = c.lift_to(self.der.b)
        xc = OrePoly((PuiseuxSeries.one(self.der.b), c), self.der)
        out = OrePoly.zero(self.der)
        for a in self.coeffs:
            out = out * xc + OrePoly.constant(a, self.der)
        return out

    def t_shift(self, i: int) -> "OrePoly":
        """h(x + i*mu*s^(m-1)), so that h(x) s^i = s^i * t_shift(h, i)."""
        d = self.der
        c = PuiseuxSeries.monomial(Scalar.from_rational(d.mu * i), d.m - 1, d.b)
        return self.subst_x_plus(c)

    def min_slope(self) -> Fraction | None:
        """r = min v_t(a_i)/i over the non-leading coefficients; None if all vanish."""
        n = self.degree
        r: Fraction | None = None
        pending: Fraction | None = None
        for i in range(1, n + 1):
            a = self.coeffs[i]
            v = a.valuation()
            if v is None:
                if a.prec is not None:
                    bound = Fraction(a.prec, a.b) / i
                    if pending is None or bound < pending:
                        pending = bound
                continue
            cand = Fraction(v, a.b) / i
            if r is None or cand < r:
                r = cand
        if pending is not None and (r is None or pending < r):
            raise PrecisionExhausted(
                "a coefficient is zero to precision but could still carry the minimal slope"
            )
        return r


def ore_mul(f: OrePoly, g: OrePoly) -> OrePoly:
    """Product in K{x, delta}; x*a = a*x + delta(a) applied recursively."""
    return f * g


def t_shift(h: OrePoly, i: int) -> OrePoly:
    return h.t_shift(i)


def power_expand(dexp: int, k: int, der: Derivation) -> OrePoly:
    """The expansion of (s^dexp * x)^k as an Ore polynomial."""
    if dexp == 0:
        raise ValueError("power_expand requires a non-zero monomial exponent")
    if k < 1:
        raise ValueError("power_expand requires a positive power")
    base = OrePoly((PuiseuxSeries.monomial(1, dexp, der.b), PuiseuxSeries.zero(der.b)), der)
    return base**k


def reduce_mod_t(f: OrePoly) -> CPolynomial:
    """The reduction of f modulo the maximal ideal of C[[s]].

    Coefficients are stored on the left of the powers of x, so the
    left-normalisation is already done and reduction is the constant term
    of each coefficient.
    """
    ascending = []
    for i in range(f.degree, -1, -1):
        a = f.coeffs[i]
        v = a._vlow()
        if v is not None and v < 0:
            raise NegativeValuation(
                f"coefficient of x^{f.degree - i} has valuation {Fraction(a.valuation(), a.b)} < 0"
            )
        ascending.append(a.coeff(0))
    return CPolynomial(ascending)


def shear_core(f: OrePoly, e: int) -> OrePoly:
    """Substitute x = s^e X and left-normalise: s^(-n*e) * f(s^e X).

    The result lives over the conjugated derivation der.sheared(e); for
    e < 0 and power-series input it has power-series coefficients again.
    """
    if e == 0:
        return f
    d2 = f.der.sheared(e)
    n = f.degree
    base = OrePoly((PuiseuxSeries.monomial(1, e, d2.b), PuiseuxSeries.zero(d2.b)), d2)
    acc = OrePoly.zero(d2)
    power = OrePoly.one(d2)
    # f(s^e X) = sum a_i (s^e X)^(n-i), built from the low end
    for i in range(n, -1, -1):
        a = f.coeffs[i]
        if not a.is_zero():
            acc = acc + power.left_mul_series(a)
        if i > 0:
            power = power * base
    return acc.shift_exponents(-n * e)


def shear(f: OrePoly, r) -> OrePoly:
    """g(X) = t^(-n r) f(t^r X), over ramification lcm(b, q) for r = p/q.

    Checks that r does not exceed any coefficient slope v_t(a_i)/i, so the
    result has power-series coefficients with minimal valuation 0 exactly
    when r is the minimal slope.
    """
    r = Fraction(r)
    if r == 0:
        return f
    if not f.is_monic():
        raise ValueError("shear expects a monic polynomial")
    b2 = math.lcm(f.der.b, r.denominator)
    fl = f.lift_to_ramification(b2)
    n = fl.degree
    for i in range(1, n + 1):
        a = fl.coeffs[i]
        v = a.valuation()
        if v is None:
            if a.prec is not None and Fraction(a.prec, b2) / i < r:
                raise PrecisionExhausted(
                    f"coefficient of x^{n - i} is zero to precision; cannot certify slope {r}"
                )
            continue
        if Fraction(v, b2) / i < r:
            raise NotMinimalSlope(
                f"slope of coefficient {n - i} is {Fraction(v, b2) / i} < {r}"
            )
    e = int(r * b2)
    return shear_core(fl, e)


def unshear(g: OrePoly, e: int) -> OrePoly:
    """Inverse of shear_core at exponent e: substitute X = s^(-e) x back."""
    return shear_core(g, -e)


def translate(f: OrePoly, lam: Scalar, r) -> OrePoly:
    """f(x - lam * t^r); the Newton-polygon translation."""
    r = Fraction(r)
    b2 = math.lcm(f.der.b, r.denominator)
    fl = f.lift_to_ramification(b2)
    c = PuiseuxSeries.monomial(-lam, int(r * b2), b2)
    return fl.subst_x_plus(c)


@dataclass
class NewtonPolygon:
    """Lower convex hull of {(n - i, v_t(a_i))} with slope clamping.

    Vertices are reported in the (n - i, v) coordinates of the definition,
    x ascending; slopes are quoted in the orientation of the worked examples
    (the slope of the face carrying roots of t-valuation r is r), ascending
    with multiplicities.  Faces steeper than the derivation's intrinsic
    shift (m - 1 per unit, in t-units) are merged into a single face of
    exactly that slope.
    """

    vertices: list[tuple[int, Fraction]]
    slopes: list[tuple[Fraction, int]]

    def single_slope(self) -> Fraction | None:
        if len(self.slopes) == 1:
            return self.slopes[0][0]
        return None

    def slope_multiset(self) -> list[Fraction]:
        out: list[Fraction] = []
        for s, mult in self.slopes:
            out.extend([s] * mult)
        return out


def newton_polygon(f: OrePoly) -> NewtonPolygon:
    if f.is_zero():
        raise ValueError("newton polygon of the zero polynomial")
    n = f.degree
    pts: list[tuple[int, Fraction]] = []
    for i in range(n + 1):
        a = f.coeffs[i]
        v = a.valuation()
        if v is None:
            continue  # zero (or zero-to-precision) coefficients carry no point
        pts.append((i, Fraction(v, a.b)))
    # lower convex hull, i ascending (monotone chain; drop collinear points)
    hull: list[tuple[int, Fraction]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    clamp = Fraction(f.der.m - 1, f.der.b)
    verts = [hull[0]]
    slopes: list[tuple[Fraction, int]] = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        s = Fraction(y2 - y1, x2 - x1)
        if s > clamp:
            break
        verts.append((x2, y2))
        slopes.append((s, x2 - x1))
    last_x = verts[-1][0]
    if last_x < hull[-1][0]:
        # merge the too-steep tail into a single face of the clamp slope
        width = hull[-1][0] - last_x
        verts.append((hull[-1][0], verts[-1][1] + clamp * width))
        slopes.append((clamp, width))
    # report in the definition's (n - i, v) coordinates, x ascending
    spec_vertices = [(n - x, y) for x, y in reversed(verts)]
    return NewtonPolygon(vertices=spec_vertices, slopes=slopes)


def apply_to_operator(f: OrePoly, op, vec: list[PuiseuxSeries]) -> list[PuiseuxSeries]:
    """Evaluate sum a_i D^(n-i) (v) for a differential operator D."""
    n = f.degree
    powers = [list(vec)]
    for _ in range(n):
        powers.append(op.apply(powers[-1]))
    b = max(f.der.b, max((x.b for x in powers[-1]), default=1))
    out = [PuiseuxSeries.zero(b) for _ in vec]
    for i in range(n + 1):
        a = f.coeffs[i]
        if a.is_zero():
            continue
        w = powers[n - i]
        out = [o + a * wj for o, wj in zip(out, w)]
    return out


def to_text(f: OrePoly) -> str:
    """Render in the CLI grammar: x^2 + (4*t^-2 + 2)*x + (...)."""
    if f.is_zero():
        return "0"
    parts: list[str] = []
    n = f.degree
    for i, a in enumerate(f.coeffs):
        if a.is_zero():
            continue
        k = n - i
        body = a.to_text()
        needs_parens = "+" in body or "- " in body or body.startswith("-")
        wrapped = f"({body})" if needs_parens else body
        if k == 0:
            parts.append(wrapped)
        else:
            xs = "x" if k == 1 else f"x^{k}"
            parts.append(xs if body == "1" else f"{wrapped}*{xs}")
    return " + ".join(parts)
