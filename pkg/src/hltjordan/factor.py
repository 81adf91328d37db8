"""Differential Hensel lifting and linear factorisation of monic Ore polynomials.

The lifting step turns a coprime factorisation of f mod t into a
factorisation over the power-series ring, one coefficient slot per stage:
a residual f - g_n h_n divisible by t^(n+1) is maintained incrementally,
and each stage solves

    g0(x + n*mu) q_n + p_n h0 = f_n   (mod t),   deg p_n < deg g0

by the extended Euclidean algorithm in C[x] (the shift by n*mu degenerates
to g0(x) when the derivation exponent m exceeds 1).

The factorisation loop peels linear factors directly while the
coefficients are power series; otherwise it shears by the minimal slope
r = min v(a_i)/i, ramifying the field when r has a denominator.  A split
reduction is lifted and both factors are pulled back; a repeated reduction
root forces r integral, and translating by the root strictly shrinks the
slope, so the loop terminates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import CoprimalityViolation, PrecisionExhausted
from .orepoly import OrePoly, reduce_mod_t, shear, translate, unshear
from .scalars import CPolynomial, Scalar, gcd_shifted_coprime, roots_of, sorted_by_re
from .series import DEFAULT_PRECISION, PuiseuxSeries


def hensel_lift(f: OrePoly, g0: CPolynomial, h0: CPolynomial, N: int, on_stage=None):
    """Lift f mod t = g0*h0 to f = g*h (mod t^(N+1)); returns (g, h).

    Stages run in units of the coefficient lattice 1/b.  ``on_stage`` is an
    instrumentation hook called as on_stage(n, g, h, residual) after every
    stage; the acceptance suite uses it to re-check the stage invariant
    f = g_n h_n (mod t^(n+1)) against a from-scratch product.
    """
    der = f.der
    fbar = reduce_mod_t(f)
    if not fbar == g0 * h0:
        raise ValueError("reduction of f does not equal g0*h0")
    if not gcd_shifted_coprime(g0, h0, der.m, shift=der.mu):
        raise CoprimalityViolation(
            "g0 and h0 fail the shifted-coprimality precondition for this derivation"
        )
    g = OrePoly.from_cpolynomial(g0, der)
    h = OrePoly.from_cpolynomial(h0, der)
    residual = f - g * h
    deg_g0 = g0.degree
    reached = N + 1
    for n in range(1, N + 1):
        if residual.is_zero():
            res_prec = min(
                (c.prec for c in residual.coeffs if c.prec is not None),
                default=None,
            )
            if not residual.coeffs or all(c.prec is None for c in residual.coeffs):
                reached = None  # the factorisation is exact
            else:
                reached = min(reached, res_prec)
            break
        v = min(c.valuation() for c in residual.coeffs if not c.is_zero())
        assert v >= n, f"stage invariant violated: residual valuation {v} < stage {n}"
        fn_coeffs = []
        for k in range(0, f.degree + 1):
            c = residual.coeff_of_power(k)
            if not c.known(n):
                raise PrecisionExhausted(
                    f"Hensel stage {n} needs coefficient slot {n} beyond precision"
                )
            fn_coeffs.append(c.coeff(n))
        fn = CPolynomial(fn_coeffs)
        if not fn.is_zero():
            if der.m == 1:
                G = g0.shifted(Scalar.from_rational(der.mu * n))
            else:
                G = g0
            u, w, gc = G.egcd(h0)
            if gc.degree != 0:
                raise CoprimalityViolation(
                    f"gcd(g0(x + {n}*mu), h0) is non-trivial at stage {n}"
                )
            Q, R = (w * fn).divmod(G)
            p_n = R
            q_n = u * fn + Q * h0
            assert p_n.degree < deg_g0 or p_n.is_zero()
            Pn = OrePoly.from_cpolynomial(p_n, der).shift_exponents(n)
            Qn = OrePoly.from_cpolynomial(q_n, der).shift_exponents(n)
            residual = residual - g * Qn - Pn * h - Pn * Qn
            g = g + Pn
            h = h + Qn
        if on_stage is not None:
            on_stage(n, g, h, residual)
    if reached is not None:
        g = OrePoly([c.truncate(reached) for c in g.coeffs], der)
        h = OrePoly([c.truncate(reached) for c in h.coeffs], der)
    return g, h


def linear_factor_regular(f: OrePoly, N: int):
    """Peel a left factor (x - L) off a monic f with power-series coefficients.

    The reduction's root of minimal real part is isolated (Re-minimality
    makes the shifted-coprimality condition automatic), lifted to stage N,
    and returned with the monic cofactor: f = (x - L) h (mod t^(N+1)).
    """
    if not f.is_monic():
        raise ValueError("linear_factor_regular expects a monic polynomial")
    if f.der.m != 1:
        raise ValueError("the regular factorisation step needs a derivation with m = 1")
    fbar = reduce_mod_t(f)
    roots = sorted_by_re(roots_of(fbar))
    g0 = CPolynomial.from_roots(roots[:1])
    h0 = CPolynomial.from_roots(roots[1:])
    g, h = hensel_lift(f, g0, h0, N)
    lam = -g.coeff_of_power(0)
    return lam, h


@dataclass
class LinearFactorisation:
    """roots such that the monic input equals (x - r_1)(x - r_2)... in order."""

    roots: list[PuiseuxSeries]
    b: int
    precision_t: Fraction | None  # agreement window of the re-multiplied product, t-units

    def product(self) -> OrePoly:
        from .series import Derivation

        return OrePoly.from_roots(self.roots, Derivation.canonical(self.b))


def _distinct(roots: list[Scalar]) -> list[Scalar]:
    out: list[Scalar] = []
    for r in roots:
        if not any(r == s for s in out):
            out.append(r)
    return out


def _factor_rec(f: OrePoly, target_t: int) -> list[PuiseuxSeries]:
    n = f.degree
    b = f.der.b
    if n == 0:
        return []
    if n == 1:
        return [-f.coeffs[1]]
    r = f.min_slope()
    if r is None or r >= 0:
        lam, h = linear_factor_regular(f, target_t * b + 2)
        return [lam] + _factor_rec(h, target_t)
    b2 = math.lcm(b, r.denominator)
    e = int(r * b2)
    g = shear(f, r)
    gbar = reduce_mod_t(g)
    roots = roots_of(gbar)
    classes = _distinct(roots)
    if len(classes) >= 2:
        ordered = sorted_by_re(roots)
        lam0 = ordered[0]
        g0 = CPolynomial.from_roots([x for x in ordered if x == lam0])
        h0 = CPolynomial.from_roots([x for x in ordered if not x == lam0])
        stage_target = target_t * b2 + n * abs(e) + 4
        G, H = hensel_lift(g, g0, h0, stage_target)
        F2 = unshear(H, e)
        F1 = unshear(G, e).t_shift(-F2.degree * e)
        return _factor_rec(F1, target_t) + _factor_rec(F2, target_t)
    rho = classes[0]
    if rho.is_zero():
        raise PrecisionExhausted(
            "sheared reduction has zero as a repeated root; coefficients are too short"
        )
    assert b2 == b, "a repeated reduction root forces an integral slope"
    f_next = translate(f, -rho, r)
    shift = PuiseuxSeries.monomial(rho, int(r * b), b)
    return [lam + shift for lam in _factor_rec(f_next, target_t)]


def factor_linear(f: OrePoly, N: int | None = None) -> LinearFactorisation:
    """Full linear factorisation of a monic f over C((t^(1/b))), d = t d/dt.

    N is the target agreement precision in t-units: re-multiplying the
    returned roots reproduces (the monic left-normalisation of) f modulo
    t^N.  Non-monic input is left-normalised by the inverse of its leading
    coefficient first.

    The slope loop consumes coefficient slots: each translation at slope
    r < 0 shifts precision windows by up to deg(f)*|r| slots, and slopes
    decrease strictly through integers, so a budget of
    N + deg(f)*(|r|+1)^2 slots is demanded up front; inputs shorter than
    that fail loudly here rather than return silently truncated roots.
    """
    if N is None:
        N = DEFAULT_PRECISION
    if f.der.m != 1:
        raise ValueError("top-level factorisation is defined for the regular derivation")
    if f.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    if not f.is_monic():
        f = f.monic()
    r = f.min_slope()
    need = N if r is None or r >= 0 else N + f.degree * (int(-r) + 1) ** 2
    for i, c in enumerate(f.coeffs):
        if c.prec is not None and Fraction(c.prec, c.b) < need:
            raise PrecisionExhausted(
                f"factorisation to t^{N} needs {need} t-units of precision; "
                f"coefficient of x^{f.degree - i} carries only {Fraction(c.prec, c.b)}"
            )
    roots = _factor_rec(f, N)
    b = 1
    for lam in roots:
        b = math.lcm(b, lam.b)
    roots = [lam.lift_to(b) for lam in roots]
    prec0 = min((lam.prec for lam in roots if lam.prec is not None), default=None)
    prec_t = None if prec0 is None else Fraction(prec0, b)
    if prec_t is not None and prec_t < N:
        raise PrecisionExhausted(
            f"roots only certified to t^{prec_t}, below the requested t^{N}"
        )
    return LinearFactorisation(roots=roots, b=b, precision_t=Fraction(N) if prec_t is not None else None)
