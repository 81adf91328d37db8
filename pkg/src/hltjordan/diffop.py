"""Formal differential operators d + A on K_b^n and their Jordan decomposition.

The pipeline mirrors the structure of the existence proof:

  1. triangularize   -- repeatedly extract an eigenpair (via the minimal
                        differential polynomial and its linear factorisation)
                        and recurse on the quotient;
  2. split_eigenspaces -- kill every coupling entry between diagonal
                        entries lying in distinct similarity classes by
                        solving the scalar equation d(X) + (a_i - a_j) X = -A_ij
                        order by order (the constructive stand-in for the
                        vanishing-extension argument), then permute the
                        classes into contiguous blocks;
  3. per block       -- gauge each diagonal entry onto the canonical
                        similarity representative with a diagonal scalar
                        gauge, subtract the representative, and compute the
                        unipotent normal form d + N by building a constant
                        basis of ker(D^n) through formal integration;
  4. descent         -- when ramification was forced on an operator defined
                        over K, check sigma-invariance of the reconstructed
                        S and N (all exponents land back on the integral
                        lattice).

Matrices are plain tuples of tuples of PuiseuxSeries; the derivation is
always the canonical extension (1/b) s d/ds of t d/dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpq

from .errors import (
    NotUnipotent,
    PrecisionExhausted,
    ResonanceError,
    SingularGauge,
)
from .factor import factor_linear
from .orepoly import OrePoly
from .scalars import Scalar
from .series import DEFAULT_PRECISION, Derivation, PuiseuxSeries, is_similar, similarity_witness_log

Matrix = tuple[tuple[PuiseuxSeries, ...], ...]
Vector = list[PuiseuxSeries]


# ---------------------------------------------------------------------------
# series-matrix helpers
# ---------------------------------------------------------------------------


def _mat(rows) -> Matrix:
    return tuple(tuple(r) for r in rows)


def _mat_identity(n: int, b: int) -> Matrix:
    one, zero = PuiseuxSeries.one(b), PuiseuxSeries.zero(b)
    return _mat([[one if i == j else zero for j in range(n)] for i in range(n)])


def _mat_lift(m: Matrix, b: int) -> Matrix:
    return _mat([[e.lift_to(b) for e in row] for row in m])


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = PuiseuxSeries.zero(a[0][0].b)
            for l in range(k):
                acc = acc + a[i][l] * b[l][j]
            row.append(acc)
        out.append(row)
    return _mat(out)


def _mat_vec(a: Matrix, v: Vector) -> Vector:
    out = []
    for row in a:
        acc = PuiseuxSeries.zero(row[0].b)
        for e, x in zip(row, v):
            acc = acc + e * x
        out.append(acc)
    return out


def _mat_add(a: Matrix, b: Matrix) -> Matrix:
    return _mat([[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)])


def _mat_derive(a: Matrix, d: Derivation) -> Matrix:
    return _mat([[e.derive(d) for e in row] for row in a])


def _mat_inverse(a: Matrix) -> Matrix:
    """Gauss-Jordan with valuation-maximal pivoting (smallest valuation wins)."""
    n = len(a)
    b = a[0][0].b
    work = [list(row) + list(ident_row) for row, ident_row in zip(a, _mat_identity(n, b))]
    for col in range(n):
        pivot_row, pivot_val = None, None
        for r in range(col, n):
            v = work[r][col].valuation()
            if v is not None and (pivot_val is None or v < pivot_val):
                pivot_row, pivot_val = r, v
        if pivot_row is None:
            raise SingularGauge(f"matrix is singular to precision at column {col}")
        work[col], work[pivot_row] = work[pivot_row], work[col]
        inv = work[col][col].invert()
        work[col] = [e * inv for e in work[col]]
        for r in range(n):
            if r == col or work[r][col].is_zero():
                continue
            factor = work[r][col]
            work[r] = [x - factor * y for x, y in zip(work[r], work[col])]
    return _mat([row[n:] for row in work])


def _vec_is_zero(v: Vector) -> bool:
    return all(x.is_zero() for x in v)


# ---------------------------------------------------------------------------
# core types
# ---------------------------------------------------------------------------


class GaugeTransform:
    """Invertible basis change, with the accumulated composition record."""

    __slots__ = ("matrix", "record", "_inverse")

    def __init__(self, matrix, record: list[str] | None = None):
        self.matrix = _mat(matrix)
        self.record = list(record or [])
        self._inverse: Matrix | None = None

    @staticmethod
    def identity(n: int, b: int) -> "GaugeTransform":
        return GaugeTransform(_mat_identity(n, b), [])

    @property
    def n(self) -> int:
        return len(self.matrix)

    @property
    def b(self) -> int:
        return self.matrix[0][0].b

    def inverse(self) -> Matrix:
        if self._inverse is None:
            self._inverse = _mat_inverse(self.matrix)
        return self._inverse

    def lift_to(self, b: int) -> "GaugeTransform":
        if b == self.b:
            return self
        return GaugeTransform(_mat_lift(self.matrix, b), self.record)

    def compose(self, other: "GaugeTransform") -> "GaugeTransform":
        """self then other: gauge(gauge(D, self), other) = gauge(D, self*other)."""
        b = math.lcm(self.b, other.b)
        return GaugeTransform(
            _mat_mul(self.lift_to(b).matrix, other.lift_to(b).matrix),
            self.record + other.record,
        )

    def apply_inverse_to(self, v: Vector) -> Vector:
        return _mat_vec(self.inverse(), v)

    def __repr__(self) -> str:
        return f"<GaugeTransform {self.n}x{self.n} over b={self.b}: {' . '.join(self.record) or 'id'}>"


class DiffOperator:
    """d + A acting on K_b^n, d the canonical extension of t d/dt."""

    __slots__ = ("A", "der")

    def __init__(self, A, b: int | None = None):
        rows = [list(r) for r in A]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("operator matrix must be square")
        bmax = b or 1
        for r in rows:
            for e in r:
                if isinstance(e, PuiseuxSeries):
                    bmax = math.lcm(bmax, e.b)
        fixed = []
        for r in rows:
            fr = []
            for e in r:
                if isinstance(e, PuiseuxSeries):
                    fr.append(e.lift_to(bmax))
                else:
                    fr.append(PuiseuxSeries.constant(Scalar.coerce(e), bmax))
            fixed.append(fr)
        self.A = _mat(fixed)
        self.der = Derivation.canonical(bmax)

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def b(self) -> int:
        return self.der.b

    def lift_to(self, b: int) -> "DiffOperator":
        if b == self.b:
            return self
        return DiffOperator(_mat_lift(self.A, b), b)

    def apply(self, v: Vector) -> Vector:
        """D(v) = d(v) + A v, componentwise."""
        b = self.b
        for x in v:
            b = math.lcm(b, x.b)
        op = self.lift_to(b)
        vv = [x.lift_to(b) for x in v]
        dv = [x.derive(op.der) for x in vv]
        av = _mat_vec(op.A, vv)
        return [x + y for x, y in zip(dv, av)]

    def gauge(self, g: GaugeTransform) -> "DiffOperator":
        """Basis change A -> g^(-1) A g + g^(-1) dg."""
        b = math.lcm(self.b, g.b)
        op = self.lift_to(b)
        gl = g.lift_to(b)
        ginv = gl.inverse()
        new_a = _mat_add(
            _mat_mul(ginv, _mat_mul(op.A, gl.matrix)),
            _mat_mul(ginv, _mat_derive(gl.matrix, op.der)),
        )
        return DiffOperator(new_a, b)

    def is_upper_triangular(self) -> bool:
        return all(self.A[i][j].is_zero() for i in range(self.n) for j in range(i))

    def diagonal(self) -> Vector:
        return [self.A[i][i] for i in range(self.n)]

    def submatrix(self, idx: list[int]) -> Matrix:
        return _mat([[self.A[i][j] for j in idx] for i in idx])

    def __repr__(self) -> str:
        rows = "; ".join(", ".join(e.to_text() for e in row) for row in self.A)
        return f"<d + [{rows}] over b={self.b}>"


@dataclass
class EigenPair:
    eigenvalue: PuiseuxSeries
    vector: Vector

    @property
    def b(self) -> int:
        return self.eigenvalue.b


@dataclass
class JordanDecomposition:
    """Eigenvalue representatives, constant nilpotent part, and the gauge
    taking the input to d + diag(eigenvalues) + N."""

    b: int
    eigenvalues: list[PuiseuxSeries]
    nilpotent: list[list[Scalar]]
    gauge: GaugeTransform

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def nilpotent_is_zero(self) -> bool:
        return all(c.is_zero() for row in self.nilpotent for c in row)

    def jordan_type(self) -> list[int]:
        """Partition of n by Jordan block sizes of N, descending."""
        n = self.n
        ranks = [n]
        power = self.nilpotent
        for _ in range(n):
            ranks.append(_scalar_rank(power))
            power = _scalar_mat_mul(power, self.nilpotent)
        # number of blocks of size >= k is rank(N^(k-1)) - rank(N^k)
        sizes: list[int] = []
        for k in range(1, n + 1):
            count_ge_k = ranks[k - 1] - ranks[k]
            sizes.extend([k] * count_ge_k)
        # sizes currently counts, for each k, how many blocks have size >= k;
        # convert to the actual partition
        blocks: list[int] = []
        ge = [ranks[k - 1] - ranks[k] for k in range(1, n + 1)]
        for k in range(n, 0, -1):
            exact = ge[k - 1] - (ge[k] if k < n else 0)
            blocks.extend([k] * exact)
        return blocks

    def normal_form(self) -> DiffOperator:
        """d + diag(eigenvalues) + N as an operator matrix."""
        n = self.n
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                e = PuiseuxSeries.constant(self.nilpotent[i][j], self.b)
                if i == j:
                    e = e + self.eigenvalues[i]
                row.append(e)
            rows.append(row)
        return DiffOperator(rows, self.b)


def _scalar_mat_mul(a: list[list[Scalar]], b: list[list[Scalar]]) -> list[list[Scalar]]:
    n = len(a)
    return [
        [sum((a[i][l] * b[l][j] for l in range(n)), Scalar.zero()) for j in range(n)]
        for i in range(n)
    ]


def _scalar_rank(m: list[list[Scalar]]) -> int:
    work = [row[:] for row in m]
    n = len(work)
    rank = 0
    col = 0
    ncols = len(work[0]) if work else 0
    while rank < n and col < ncols:
        pivot = None
        for r in range(rank, n):
            if not work[r][col].is_zero():
                pivot = r
                break
        if pivot is None:
            col += 1
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        pv = work[rank][col]
        work[rank] = [c / pv for c in work[rank]]
        for r in range(n):
            if r != rank and not work[r][col].is_zero():
                f = work[r][col]
                work[r] = [c - f * d for c, d in zip(work[r], work[rank])]
        rank += 1
        col += 1
    return rank


# ---------------------------------------------------------------------------
# eigenvalue extraction
# ---------------------------------------------------------------------------


def minimal_diffpoly(D: DiffOperator, v: Vector) -> OrePoly:
    """Monic f of minimal degree with f(D) v = 0, by the first Krylov dependency.

    Builds v, Dv, D^2 v, ... and reduces each new vector against the
    previous ones with valuation-maximal pivoting; the elimination
    coefficients of the first vanishing reduction give the coefficients.
    """
    if _vec_is_zero(v):
        raise ValueError("minimal polynomial of the zero vector")
    b = D.b
    for x in v:
        b = math.lcm(b, x.b)
    op = D.lift_to(b)
    vv = [x.lift_to(b) for x in v]
    basis: list[tuple[int, Vector, list[PuiseuxSeries]]] = []  # (pivot index, vector, combo)
    krylov: list[Vector] = [vv]
    while True:
        k = len(krylov) - 1
        w = [x for x in krylov[-1]]
        combo = [
            PuiseuxSeries.one(b) if j == k else PuiseuxSeries.zero(b) for j in range(k + 1)
        ]
        for piv, bas, bas_combo in basis:
            if w[piv].is_zero():
                continue
            c = w[piv] * bas[piv].invert()
            w = [x - c * y for x, y in zip(w, bas)]
            combo = [
                x - c * (bas_combo[j] if j < len(bas_combo) else PuiseuxSeries.zero(b))
                for j, x in enumerate(combo)
            ]
        if _vec_is_zero(w):
            # dependency: sum combo_j D^j v = 0 with combo_k = 1
            lead = combo[k]
            if lead.is_zero():
                raise PrecisionExhausted("Krylov elimination lost its leading coefficient")
            inv = lead.invert()
            coeffs = [inv * combo[j] for j in range(k, -1, -1)]
            return OrePoly(coeffs, op.der)
        if k >= op.n:
            raise PrecisionExhausted(
                "no Krylov dependency found within the dimension; pivots are "
                "indistinguishable from zero at this precision"
            )
        piv, piv_val = None, None
        for i, x in enumerate(w):
            val = x.valuation()
            if val is not None and (piv_val is None or val < piv_val):
                piv, piv_val = i, val
        basis.append((piv, w, combo))
        krylov.append(op.apply(krylov[-1]))


def eigen(D: DiffOperator, N: int | None = None) -> EigenPair:
    """An eigenpair of D, after base change if the factorisation demands one.

    Factor the minimal differential polynomial of e_1 (or of the first
    standard vector not annihilated trivially) and scan the linear factors
    from the right for the last vanishing tail.
    """
    if N is None:
        N = DEFAULT_PRECISION
    n = D.n
    v: Vector = [
        PuiseuxSeries.one(D.b) if i == 0 else PuiseuxSeries.zero(D.b) for i in range(n)
    ]
    f = minimal_diffpoly(D, v)
    lf = factor_linear(f, N)
    b = math.lcm(D.b, lf.b)
    op = D.lift_to(b)
    roots = [r.lift_to(b) for r in lf.roots]
    chain: list[Vector] = [[x.lift_to(b) for x in v]]  # chain[j] = (D-L_{deg-j+1})...(D-L_deg) v
    for j in range(len(roots) - 1, -1, -1):
        u = chain[-1]
        lam = roots[j]
        du = op.apply(u)
        chain.append([x - lam * y for x, y in zip(du, u)])
    # chain[deg - i + 1] corresponds to u_i = (D - L_i)...(D - L_deg) v
    deg = len(roots)
    largest = None
    for i in range(deg, 0, -1):
        if _vec_is_zero(chain[deg - i + 1]):
            largest = i
            break
    if largest is None:
        raise PrecisionExhausted("minimal polynomial failed to annihilate its vector")
    vec = chain[deg - largest]
    return EigenPair(eigenvalue=roots[largest - 1], vector=vec)


# ---------------------------------------------------------------------------
# triangularisation
# ---------------------------------------------------------------------------


def triangularize(D: DiffOperator, N: int | None = None) -> tuple[DiffOperator, GaugeTransform]:
    """Gauge to upper-triangular form over a common ramification."""
    if D.is_upper_triangular():
        return D, GaugeTransform.identity(D.n, D.b)
    n = D.n
    ep = eigen(D, N)
    b = math.lcm(D.b, ep.eigenvalue.b)
    op = D.lift_to(b)
    w = [x.lift_to(b) for x in ep.vector]
    piv, piv_val = None, None
    for i, x in enumerate(w):
        val = x.valuation()
        if val is not None and (piv_val is None or val < piv_val):
            piv, piv_val = i, val
    cols: list[Vector] = [w]
    for j in range(n):
        if j != piv:
            cols.append(
                [PuiseuxSeries.one(b) if i == j else PuiseuxSeries.zero(b) for i in range(n)]
            )
    g0 = GaugeTransform(_mat([[cols[j][i] for j in range(n)] for i in range(n)]), ["eigvec"])
    d1 = op.gauge(g0)
    for i in range(1, n):
        if not d1.A[i][0].is_zero():
            raise PrecisionExhausted("eigenvector column failed to clear below the diagonal")
    if n == 1:
        return d1, g0
    sub = DiffOperator(_mat([[d1.A[i][j] for j in range(1, n)] for i in range(1, n)]), b)
    t_sub, g_sub = triangularize(sub, N)
    b2 = math.lcm(b, t_sub.b)
    gs = g_sub.lift_to(b2)
    block_rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == 0 and j == 0:
                row.append(PuiseuxSeries.one(b2))
            elif i == 0 or j == 0:
                row.append(PuiseuxSeries.zero(b2))
            else:
                row.append(gs.matrix[i - 1][j - 1])
        block_rows.append(row)
    g1 = GaugeTransform(_mat(block_rows), g_sub.record)
    total = g0.compose(g1)
    return d1.lift_to(b2).gauge(g1), total


# ---------------------------------------------------------------------------
# eigenspace splitting
# ---------------------------------------------------------------------------


def solve_twisted_scalar(w: PuiseuxSeries, rhs: PuiseuxSeries, prec_slots: int | None = None) -> PuiseuxSeries:
    """Solve d(X) + w X = rhs for X, d = (1/b) s d/ds on the common lattice.

    Solvable term by term exactly when w is not similar to zero: either
    v(w) < 0 and the leading coefficient of w dominates every order, or
    v(w) = 0 with constant term outside (1/b)Z so j/b + w_0 never vanishes.
    """
    b = math.lcm(w.b, rhs.b)
    w = w.lift_to(b)
    rhs = rhs.lift_to(b)
    if is_similar(w, PuiseuxSeries.zero(b)):
        raise ResonanceError("twisted equation is resonant: classes are similar")
    if rhs.is_zero():
        return PuiseuxSeries.zero(b, rhs.prec)
    mu = Fraction(1, b)
    vw = w.valuation()
    vr = rhs.valuation()
    w_terms = dict(w.terms())
    rhs_terms = dict(rhs.terms())
    limits = [p for p in (w.prec, rhs.prec) if p is not None]
    if vw < 0:
        v_x = vr - vw
        j_hi = min(limits) if limits else vr + DEFAULT_PRECISION * max(1, b)
        x: dict[int, Scalar] = {}
        w_lead = w_terms[vw]
        for j in range(vr, j_hi):
            acc = rhs_terms.get(j, Scalar.zero())
            xj = x.get(j)
            if xj is not None:
                acc = acc - xj * Scalar.from_rational(mu * j)
            for l, wl in w_terms.items():
                if l == vw:
                    continue
                xi = x.get(j - l)
                if xi is not None:
                    acc = acc - wl * xi
            if not acc.is_zero():
                x[j - vw] = acc / w_lead
            else:
                x.setdefault(j - vw, Scalar.zero())
        return PuiseuxSeries.from_terms(x, b, j_hi - vw)
    # vw == 0 with non-resonant constant term
    w0 = w_terms.get(0, Scalar.zero())
    j_hi = min(limits) if limits else vr + DEFAULT_PRECISION * max(1, b)
    x = {}
    for j in range(vr, j_hi):
        acc = rhs_terms.get(j, Scalar.zero())
        for l, wl in w_terms.items():
            if l == 0:
                continue
            xi = x.get(j - l)
            if xi is not None:
                acc = acc - wl * xi
        denom = Scalar.from_rational(mu * j) + w0
        if denom.is_zero():
            raise ResonanceError(f"order-{j} coefficient is resonant")
        if not acc.is_zero():
            x[j] = acc / denom
    return PuiseuxSeries.from_terms(x, b, j_hi)


def split_eigenspaces(D: DiffOperator):
    """Decouple similarity classes of an upper-triangular operator.

    Returns (block-diagonal operator, gauge, partition): the partition lists
    contiguous index groups after a stable permutation; every coupling entry
    between distinct classes is removed by an elementary unipotent gauge.
    """
    if not D.is_upper_triangular():
        raise ValueError("split_eigenspaces expects an upper-triangular operator")
    n = D.n
    b = D.b
    diag = D.diagonal()
    cls: list[int] = []
    reps: list[PuiseuxSeries] = []
    for d_entry in diag:
        for ci, rep in enumerate(reps):
            if is_similar(d_entry, rep):
                cls.append(ci)
                break
        else:
            reps.append(d_entry)
            cls.append(len(reps) - 1)
    op = D
    total = GaugeTransform.identity(n, b)
    for span in range(1, n):
        for i in range(0, n - span):
            j = i + span
            if cls[i] == cls[j] or op.A[i][j].is_zero():
                continue
            w = op.A[i][i] - op.A[j][j]
            x = solve_twisted_scalar(w, -op.A[i][j])
            rows = [
                [
                    PuiseuxSeries.one(op.b) if r == c else PuiseuxSeries.zero(op.b)
                    for c in range(n)
                ]
                for r in range(n)
            ]
            rows[i][j] = x.lift_to(op.b)
            e = GaugeTransform(_mat(rows), [f"decouple({i},{j})"])
            op = op.gauge(e)
            total = total.compose(e)
    # verify decoupling before permuting
    for i in range(n):
        for j in range(n):
            if cls[i] != cls[j] and not op.A[i][j].is_zero():
                raise ResonanceError(f"entry ({i},{j}) survived decoupling")
    order = sorted(range(n), key=lambda i: cls[i])
    if order != list(range(n)):
        rows = [
            [
                PuiseuxSeries.one(op.b) if order[c] == r else PuiseuxSeries.zero(op.b)
                for c in range(n)
            ]
            for r in range(n)
        ]
        p = GaugeTransform(_mat(rows), ["permute-classes"])
        op = op.gauge(p)
        total = total.compose(p)
    partition: list[list[int]] = []
    seen: dict[int, list[int]] = {}
    for new_idx, old_idx in enumerate(order):
        seen.setdefault(cls[old_idx], []).append(new_idx)
    for ci in sorted(seen):
        partition.append(seen[ci])
    return op, total, partition


# ---------------------------------------------------------------------------
# unipotent normal form
# ---------------------------------------------------------------------------


def canonical_similarity_rep(a: PuiseuxSeries) -> PuiseuxSeries:
    """The canonical representative of the similarity class of a.

    Negative-valuation part kept, constant term reduced into [0, 1/b) by
    subtracting an integral multiple of 1/b, positive-valuation tail
    dropped.  Representatives of similar series coincide.
    """
    b = a.b
    terms = {k: c for k, c in a.terms() if k < 0}
    c0 = a.coeff(0) if (a.prec is None or a.prec > 0) else Scalar.zero()
    if c0.exact:
        k = math.floor(c0.re * b)
        red = Scalar(c0.re - mpq(int(k), b), c0.im)
    else:
        k = math.floor(c0.re * b)
        red = Scalar(c0.re - k / b, c0.im, exact=False)
    if not red.is_zero():
        terms[0] = red
    return PuiseuxSeries.from_terms(terms, b)


def unipotent_normal_form(D: DiffOperator):
    """Constant nilpotent N and gauge W with gauge(D, W) = d + N.

    Precondition: the matrix is strictly upper triangular (every diagonal
    entry exactly zero after the similarity normalisation).  The kernel
    flag of D^n is built by the inductive integration construction; in the
    resulting basis the operator is d + N with N constant because the
    kernel is a finite-dimensional C-space preserved by D.
    """
    n = D.n
    b = D.b
    for i in range(n):
        for j in range(i + 1):
            if not D.A[i][j].is_zero():
                raise NotUnipotent(
                    f"entry ({i},{j}) is not zero; operator is not in strict upper form"
                )
    cols = _kernel_flag(D)
    w = GaugeTransform(_mat([[cols[j][i] for j in range(n)] for i in range(n)]), ["unipotent"])
    gauged = D.gauge(w)
    nil: list[list[Scalar]] = []
    for i in range(n):
        row = []
        for j in range(n):
            e = gauged.A[i][j]
            if not e.is_constant():
                raise NotUnipotent(
                    f"normal-form entry ({i},{j}) = {e.to_text()} is not constant"
                )
            row.append(e.coeff(0) if (e.prec is None or e.prec > 0) else Scalar.zero())
        nil.append(row)
    power = [row[:] for row in nil]
    for _ in range(n - 1):
        power = _scalar_mat_mul(power, nil)
    if any(not c.is_zero() for r in power for c in r):
        raise NotUnipotent("normal-form constant matrix is not nilpotent")
    return nil, w


def _kernel_flag(D: DiffOperator) -> list[Vector]:
    """n K-independent vectors spanning ker(D^n) for strictly upper D."""
    n = D.n
    b = D.b
    one, zero = PuiseuxSeries.one(b), PuiseuxSeries.zero(b)
    if n == 1:
        return [[one]]
    sub = DiffOperator(_mat([[D.A[i][j] for j in range(1, n)] for i in range(1, n)]), b)
    sub_flag = _kernel_flag(sub)
    e1: Vector = [one] + [zero] * (n - 1)
    out: list[Vector] = [e1]
    der = D.der
    for wvec in sub_flag:
        v: Vector = [zero] + list(wvec)
        u = v
        for _ in range(n - 1):
            u = D.apply(u)
        gamma = u[0]
        for i in range(1, n):
            if not u[i].is_zero():
                raise NotUnipotent("kernel-flag recursion left a non-zero tail")
        if gamma.prec is not None and gamma.prec <= 0:
            raise PrecisionExhausted("integration target has no constant-term window")
        a0 = gamma.coeff(0)
        tail = gamma - PuiseuxSeries.constant(a0, b)
        bi = tail.integrate(der, order=n - 1)
        out.append([v[0] - bi] + list(wvec))
    return out


# ---------------------------------------------------------------------------
# the full decomposition
# ---------------------------------------------------------------------------


def jordan(D: DiffOperator, N: int | None = None) -> JordanDecomposition:
    """Jordan decomposition: gauge to d + diag(eigenvalues) + constant nilpotent.

    Pipeline: triangularize, split the similarity classes into blocks,
    normalise each block's diagonal onto the canonical representative with
    diagonal scalar gauges, subtract it, run the unipotent normal form and
    add it back.
    """
    tri, g1 = triangularize(D, N)
    blocked, g2, partition = split_eigenspaces(tri)
    n = blocked.n
    b = blocked.b
    total = g1.compose(g2)
    eigenvalues: list[PuiseuxSeries] = [PuiseuxSeries.zero(b)] * n
    nil: list[list[Scalar]] = [[Scalar.zero() for _ in range(n)] for _ in range(n)]
    assembled = GaugeTransform.identity(n, b)
    rows = [
        [PuiseuxSeries.zero(b) for _ in range(n)] for _ in range(n)
    ]
    for block in partition:
        rep = canonical_similarity_rep(blocked.A[block[0]][block[0]])
        rep = rep.lift_to(b)
        # diagonal scalar gauges moving every diagonal entry onto rep
        witnesses: list[PuiseuxSeries] = []
        for k in block:
            delta = rep - blocked.A[k][k]
            kexp, unit = similarity_witness_log(delta)
            witnesses.append(unit.shift_exp(kexp))
        m = len(block)
        i0 = block[0]
        cmat = [
            [witnesses[r] if r == c else PuiseuxSeries.zero(b) for c in range(m)]
            for r in range(m)
        ]
        cg = GaugeTransform(_mat(cmat), [f"diag-normalise@{i0}"])
        block_op = DiffOperator(blocked.submatrix(block), b)
        normed = block_op.gauge(cg)
        strict_rows = []
        for r in range(m):
            row = []
            for c in range(m):
                if c > r:
                    row.append(normed.A[r][c])
                else:
                    e = normed.A[r][c] - (rep if r == c else PuiseuxSeries.zero(b))
                    if not e.is_zero():
                        raise NotUnipotent(
                            f"block diagonal failed to normalise at ({r},{c}): {e.to_text()}"
                        )
                    row.append(PuiseuxSeries.zero(b, e.prec))
            strict_rows.append(row)
        strict = DiffOperator(_mat(strict_rows), normed.b)
        nblock, wblock = unipotent_normal_form(strict)
        bg = cg.compose(wblock)
        for r in range(m):
            eigenvalues[block[r]] = rep.lift_to(bg.b) if bg.b != b else rep
            for c in range(m):
                nil[block[r]][block[c]] = nblock[r][c]
                rows[block[r]][block[c]] = bg.matrix[r][c]
    assembled = GaugeTransform(_mat(rows), ["blocks"])
    total = total.compose(assembled)
    bfin = total.b
    return JordanDecomposition(
        b=bfin,
        eigenvalues=[e.lift_to(bfin) for e in eigenvalues],
        nilpotent=nil,
        gauge=total,
    )


def descent_check(result: JordanDecomposition, original: DiffOperator) -> bool:
    """Galois descent: sigma-invariance of S and N over the original K-basis.

    sigma sends s to zeta_b s, so a matrix is sigma-invariant exactly when
    every stored coefficient sits on an exponent divisible by b (i.e. an
    integral power of t).  Constants are trivially invariant.
    """
    b = result.b
    if b == 1:
        return True
    g = result.gauge.matrix
    ginv = result.gauge.inverse()
    der = Derivation.canonical(b)
    n = result.n
    diag_rows = [
        [
            result.eigenvalues[i] if i == j else PuiseuxSeries.zero(b)
            for j in range(n)
        ]
        for i in range(n)
    ]
    nil_rows = [
        [PuiseuxSeries.constant(result.nilpotent[i][j], b) for j in range(n)]
        for i in range(n)
    ]
    d_ginv = _mat([[e.derive(der) for e in row] for row in ginv])
    s_mat = _mat_add(_mat_mul(g, _mat_mul(_mat(diag_rows), ginv)), _mat_mul(g, d_ginv))
    n_mat = _mat_mul(g, _mat_mul(_mat(nil_rows), ginv))
    for mat in (s_mat, n_mat):
        for row in mat:
            for e in row:
                for k, c in e.terms():
                    if k % b != 0 and not c.is_zero():
                        return False
    return True
