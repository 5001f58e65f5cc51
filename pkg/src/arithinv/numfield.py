"""Number fields, verified unit systems, and regulators.

Field elements are written in the power basis of the generator theta of
the defining polynomial, as sequences of d rationals ``c_0..c_{d-1}``
meaning ``sum c_i theta^i``.  Units are supplied (or, for real
quadratic fields, found by continued fractions) and then *verified*:
exact unit norm and integrality via the exact characteristic
polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpf

from . import arith, prec
from .errors import (
    DegreeMismatch,
    DependentUnits,
    InvariantError,
    MissingUnits,
    NotSquarefree,
    WrongUnitCount,
    ZeroElement,
)

ROOT_TOL = 1e-18


@dataclass(frozen=True)
class NumberField:
    label: str
    poly: tuple  # integer coefficients, constant first, monic
    degree: int
    r1: int
    r2: int
    disc: int
    w: int  # number of roots of unity
    embeddings: tuple  # d certified roots, reals first (ascending)

    @property
    def places(self):
        """One root per archimedean place: r1 reals then r2 pair representatives."""
        reps = [e for e in self.embeddings[self.r1 :] if e.imag > 0]
        return tuple(self.embeddings[: self.r1]) + tuple(reps)

    @property
    def place_weights(self):
        return (1,) * self.r1 + (2,) * self.r2


def poly_discriminant(poly):
    """disc(p) = (-1)^(d(d-1)/2) Res(p, p') / lc(p), exact."""
    d = arith.poly_degree(poly)
    res = arith.resultant(poly, arith.poly_deriv(poly))
    sign = -1 if (d * (d - 1) // 2) % 2 else 1
    return sign * res / Fraction(poly[-1])


def _check_no_rational_root(poly):
    # monic integer polynomial: any rational root is an integer divisor of poly[0]
    c0 = poly[0]
    if c0 == 0:
        raise InvariantError("defining polynomial has root 0")
    for t in sorted({d for d in range(1, abs(c0) + 1) if c0 % d == 0}):
        for cand in (t, -t):
            if arith.poly_eval(poly, cand) == 0:
                raise InvariantError("defining polynomial is reducible (root %d)" % cand)


def number_field(label, poly, disc=None, w=2):
    """Build a NumberField from a monic squarefree integer polynomial.

    The discriminant is computed exactly for degree <= 2 and must be
    supplied otherwise; it is validated against disc(poly) = disc * f^2.
    Irreducibility is only checked through rational roots (the corpus is
    trusted beyond that).
    """
    poly = tuple(arith.poly_normalize(poly))
    d = arith.poly_degree(poly)
    if d < 1:
        raise InvariantError("defining polynomial must have degree >= 1")
    if poly[-1] != 1:
        raise InvariantError("defining polynomial must be monic")
    if not arith.is_squarefree_poly(poly):
        raise NotSquarefree("defining polynomial has repeated roots")
    if d > 1:
        _check_no_rational_root(poly)

    roots = arith.poly_roots(poly, ROOT_TOL)
    r1 = sum(1 for r in roots if r.imag == 0)
    r2 = (d - r1) // 2

    dpoly = poly_discriminant(poly)
    if dpoly.denominator != 1:
        raise InvariantError("non-integral polynomial discriminant")
    dpoly = dpoly.numerator
    if disc is None:
        if d == 1:
            disc = 1
        elif d == 2:
            disc = _fundamental_discriminant(dpoly)
        else:
            raise InvariantError("field discriminant must be supplied for degree > 2")
    q, r = divmod(dpoly, disc)
    if r != 0 or q <= 0 or math.isqrt(q) ** 2 != q:
        raise InvariantError(
            "disc(poly) = %d is not disc * square for supplied disc %d" % (dpoly, disc)
        )
    if w % 2 != 0:
        raise InvariantError("root-of-unity count must be even")
    return NumberField(label, poly, d, r1, r2, int(disc), int(w), tuple(roots))


def _fundamental_discriminant(dpoly):
    fac = arith.factorize(dpoly)
    m = fac.sign
    for p, e in fac.factors:
        if e % 2 == 1:
            m *= p
    return m if m % 4 == 1 else 4 * m


def quadratic_field(m, label=None):
    """The field of x^2 - m for squarefree m, with standard disc and w."""
    if m in (0, 1) or not arith.is_squarefree_int(m):
        raise NotSquarefree("m must be squarefree and not 0 or 1")
    w = {-1: 4, -3: 6}.get(m, 2)
    if label is None:
        label = "Q_sqrt%d" % m if m > 0 else "Q_sqrt_m%d" % -m
    return number_field(label, (-m, 0, 1), w=w)


def unit_rank(field):
    return field.r1 + field.r2 - 1


# ---------------------------------------------------------------------------
# elements in the power basis


def _as_coeffs(field, coeffs):
    c = [Fraction(x) for x in coeffs]
    if len(c) > field.degree:
        raise InvariantError("element has more coefficients than the field degree")
    return c + [Fraction(0)] * (field.degree - len(c))


def norm(field, coeffs):
    """N(alpha) as the resultant of the defining polynomial with alpha."""
    c = arith.poly_normalize(_as_coeffs(field, coeffs))
    return Fraction(arith.resultant(field.poly, c))


def mult_matrix(field, coeffs):
    """Matrix of multiplication by alpha on the power basis (column-wise action)."""
    d = field.degree
    c = _as_coeffs(field, coeffs)
    cols = []
    cur = c
    base = [Fraction(x) for x in field.poly[:-1]]  # theta^d = -base
    for _ in range(d):
        cols.append(cur)
        nxt = [Fraction(0)] + cur[:-1]
        top = cur[-1]
        cur = [nxt[i] - top * base[i] for i in range(d)]
    return [[cols[j][i] for j in range(d)] for i in range(d)]


def element_charpoly(field, coeffs):
    return arith.charpoly(mult_matrix(field, coeffs))


def is_algebraic_integer(field, coeffs):
    return all(c.denominator == 1 for c in element_charpoly(field, coeffs))


def embed(field, coeffs, place):
    c = _as_coeffs(field, coeffs)
    return arith.poly_eval(c, place.value)


def log_embedding(field, coeffs):
    """The weighted log map: log|s(alpha)| per real place, twice that per pair."""
    c = _as_coeffs(field, coeffs)
    if all(x == 0 for x in c):
        raise ZeroElement("log embedding of 0")
    out = []
    with prec.working(20):
        for weight, place in zip(field.place_weights, field.places):
            val = arith.poly_eval([mpf(x.numerator) / x.denominator for x in c], place.value)
            out.append(weight * mpmath.log(abs(val)))
    return out


# ---------------------------------------------------------------------------
# unit systems and the regulator


@dataclass(frozen=True)
class UnitSystem:
    units: tuple  # unit coefficient vectors (tuples of Fraction)
    log_matrix: tuple  # rows of weighted log embeddings (tuples of mpf)


def unit_system(field, units_coeffs):
    """Verify the supplied units and assemble their log-embedding matrix."""
    units = []
    rows = []
    for coeffs in units_coeffs:
        c = tuple(_as_coeffs(field, coeffs))
        cp = element_charpoly(field, c)
        if any(x.denominator != 1 for x in cp):
            raise InvariantError("supplied unit is not an algebraic integer: %s" % (c,))
        if abs(norm(field, c)) != 1:
            raise InvariantError("supplied element is not a unit: %s" % (c,))
        row = log_embedding(field, c)
        if abs(float(mpmath.fsum(row))) > 1e-9:
            raise InvariantError("unit log row does not sum to 0: %s" % (c,))
        units.append(c)
        rows.append(tuple(row))
    return UnitSystem(tuple(units), tuple(rows))


def pell_unit_system(field):
    """Fundamental unit of a real quadratic field, by continued fractions."""
    if field.degree != 2 or field.r1 != 2:
        raise MissingUnits("automatic units only for real quadratic fields")
    m = -field.poly[0]
    u = arith.pell_fundamental_solution(m)
    return unit_system(field, [u.power_coeffs()])


def regulator(field, units):
    """|det| of the bordered unit-log matrix; 1.0 for unit rank 0.

    The (r1+r2)-square matrix has the weighted unit logs as its first r
    rows and the constant row 1/(r1+r2) at the bottom; the r x r minor
    obtained by deleting the last row and column must agree to 1e-10.
    """
    r = unit_rank(field)
    n = field.r1 + field.r2
    got = len(units.units) if units is not None else 0
    if got != r:
        raise WrongUnitCount("expected %d independent units, got %d" % (r, got))
    if r == 0:
        return 1.0
    with prec.working(20):
        rows = [list(row) for row in units.log_matrix]
        bordered = mpmath.matrix(rows + [[mpf(1) / n] * n])
        det_b = abs(mpmath.det(bordered))
        minor = mpmath.matrix([row[:-1] for row in rows])
        det_m = abs(mpmath.det(minor))
        if abs(det_b - det_m) > 1e-10:
            raise InvariantError(
                "regulator determinant forms disagree: %s vs %s" % (det_b, det_m)
            )
        hadamard = 1.0
        for row in rows:
            hadamard *= math.sqrt(sum(float(x) ** 2 for x in row))
        if float(det_b) < 1e-12 * max(1.0, hadamard):
            raise DependentUnits("unit log rows are numerically dependent")
        return float(det_b)


# ---------------------------------------------------------------------------
# field records and the CM regulator comparison


@dataclass(frozen=True)
class FieldRecord:
    field: NumberField
    units: UnitSystem | None = None
    subfield_label: str | None = None
    r0: int | None = None


def field_regulator(record):
    """Regulator of a corpus field; real quadratics fall back to Pell units."""
    field = record.field
    if unit_rank(field) == 0:
        return 1.0
    units = record.units
    if units is None:
        if field.degree == 2 and field.r1 == 2:
            units = pell_unit_system(field)
        else:
            raise MissingUnits("no units supplied for %s" % field.label)
    return regulator(field, units)


@dataclass(frozen=True)
class CmVerdict:
    is_cm: bool
    s: int | None
    ratio: float | None


def verify_cm(record, subrecord):
    """Check the CM shape of K over its declared maximal totally real subfield.

    K is CM over K0 when K is totally imaginary, K0 totally real and
    [K:K0] = 2; then the regulator ratio must be an exact power 2^s with
    r0 - 1 <= s <= r0.
    """
    K = record.field
    K0 = subrecord.field
    totally_imaginary = K.r1 == 0
    totally_real_sub = K0.r2 == 0
    if not (totally_imaginary and totally_real_sub):
        return CmVerdict(False, None, None)
    if K.degree != 2 * K0.degree:
        raise DegreeMismatch(
            "CM claim needs [K:K0] = 2, got degrees %d over %d" % (K.degree, K0.degree)
        )
    ratio = field_regulator(record) / field_regulator(subrecord)
    s = math.log2(ratio)
    s_int = round(s)
    if abs(s - s_int) > 1e-6:
        raise InvariantError("CM regulator ratio %.12g is not a power of 2" % ratio)
    r0 = record.r0 if record.r0 is not None else unit_rank(K0)
    if not (r0 - 1 <= s_int <= r0):
        raise InvariantError("CM exponent s=%d outside [%d, %d]" % (s_int, r0 - 1, r0))
    return CmVerdict(True, s_int, ratio)
