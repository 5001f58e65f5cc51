"""Elliptic curves over Q: models, reduction data, canonical heights,
the height pairing, Mordell-Weil regulators, and the nonnegative
differential height.

Heights use the x-coordinate normalization hhat_x(P) =
lim 4^(-n) h_x(2^n P).  The bilinear pairing is attached to the cubic
polarization, a single auditable constant: <P,P> = HEIGHT_SCALE *
hhat_x(P) with HEIGHT_SCALE = 3/2 (the x-function has degree 2, the
polarization degree 3).

Two independent height paths are kept deliberately separate:

* the primary path decomposes hhat_x place by place -- an archimedean
  series in the real embedding plus one exact p-adic valuation series
  per bad prime; the decomposition follows from the product formula
  applied to the duplication map x(2P) = F(x)/G(x);
* the oracle path doubles the point with exact integer coordinate
  pairs and rescales, with the explicit error bound C(E)/4^n, C(E)
  derived from resultant certificates of the same F, G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpf

from . import analytic, arith, prec
from .errors import (
    DependentPoints,
    InvariantError,
    NoConvergence,
    PointNotOnCurve,
    SingularCurve,
)

HEIGHT_SCALE = Fraction(3, 2)  # pairing normalization: cubic polarization over x
TORSION_ORDER_BOUND = 12  # largest torsion order over Q
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class WeierstrassCurve:
    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction
    b2: Fraction
    b4: Fraction
    b6: Fraction
    b8: Fraction
    c4: Fraction
    c6: Fraction
    delta: Fraction
    j: Fraction

    @property
    def a_invariants(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def is_integral(self):
        return all(a.denominator == 1 for a in self.a_invariants)


def weierstrass_curve(a1, a2, a3, a4, a6):
    """Derived b/c invariants and discriminant from a1..a6 (exact)."""
    a1, a2, a3, a4, a6 = (Fraction(a) for a in (a1, a2, a3, a4, a6))
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
    delta = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    if delta == 0:
        raise SingularCurve("discriminant vanishes")
    assert 4 * b8 == b2 * b6 - b4 * b4
    assert c4**3 - c6**2 == 1728 * delta
    return WeierstrassCurve(
        a1, a2, a3, a4, a6, b2, b4, b6, b8, c4, c6, delta, c4**3 / delta
    )


# ---------------------------------------------------------------------------
# points and the group law


@dataclass(frozen=True)
class Point:
    x: Fraction | None = None
    y: Fraction | None = None

    @property
    def is_infinity(self):
        return self.x is None

    @classmethod
    def of(cls, x, y):
        return cls(Fraction(x), Fraction(y))


INFINITY = Point()


def on_curve(curve, point):
    if point.is_infinity:
        return True
    x, y = point.x, point.y
    lhs = y * y + curve.a1 * x * y + curve.a3 * y
    rhs = x**3 + curve.a2 * x * x + curve.a4 * x + curve.a6
    return lhs == rhs


def _require_on_curve(curve, point):
    if not on_curve(curve, point):
        raise PointNotOnCurve("point %s is not on the curve" % (point,))


def negate(curve, point):
    if point.is_infinity:
        return point
    return Point(point.x, -point.y - curve.a1 * point.x - curve.a3)


def add(curve, p, q):
    """Exact chord-tangent addition."""
    _require_on_curve(curve, p)
    _require_on_curve(curve, q)
    if p.is_infinity:
        return q
    if q.is_infinity:
        return p
    a1, a2, a3, a4 = curve.a1, curve.a2, curve.a3, curve.a4
    if p.x == q.x:
        if q.y == -p.y - a1 * p.x - a3:
            return INFINITY
        lam = (3 * p.x * p.x + 2 * a2 * p.x + a4 - a1 * p.y) / (
            2 * p.y + a1 * p.x + a3
        )
    else:
        lam = (q.y - p.y) / (q.x - p.x)
    nu = p.y - lam * p.x
    x3 = lam * lam + a1 * lam - a2 - p.x - q.x
    y3 = -(lam + a1) * x3 - nu - a3
    return Point(x3, y3)


def scalar_mul(curve, n, point):
    if n < 0:
        return scalar_mul(curve, -n, negate(curve, point))
    acc = INFINITY
    base = point
    while n:
        if n & 1:
            acc = add(curve, acc, base)
        base = add(curve, base, base)
        n >>= 1
    return acc


def is_torsion(curve, point):
    """Exact torsion test: some multiple nP = O with n <= 12 (Mazur bound)."""
    if point.is_infinity:
        return True
    q = point
    for _ in range(TORSION_ORDER_BOUND):
        q = add(curve, q, point)
        if q.is_infinity:
            return True
    return False


# ---------------------------------------------------------------------------
# model changes and minimalization


def transform_curve(curve, u, r, s, t):
    """Coordinate change x = u^2 x' + r, y = u^3 y' + s u^2 x' + t."""
    u, r, s, t = Fraction(u), Fraction(r), Fraction(s), Fraction(t)
    a1, a2, a3, a4, a6 = curve.a_invariants
    return weierstrass_curve(
        (a1 + 2 * s) / u,
        (a2 - s * a1 + 3 * r - s * s) / u**2,
        (a3 + r * a1 + 2 * t) / u**3,
        (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t) / u**4,
        (a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1) / u**6,
    )


def transform_point(point, u, r, s, t):
    if point.is_infinity:
        return point
    u, r, s, t = Fraction(u), Fraction(r), Fraction(s), Fraction(t)
    x = (point.x - r) / u**2
    y = (point.y - s * (point.x - r) - t) / u**3
    return Point(x, y)


def untransform_point(point, u, r, s, t):
    if point.is_infinity:
        return point
    u, r, s, t = Fraction(u), Fraction(r), Fraction(s), Fraction(t)
    x = u**2 * point.x + r
    y = u**3 * point.y + s * u**2 * point.x + t
    return Point(x, y)


@dataclass(frozen=True)
class MinimalModel:
    curve: WeierstrassCurve
    u: Fraction
    r: Fraction
    s: Fraction
    t: Fraction

    def to_minimal(self, point):
        return transform_point(point, self.u, self.r, self.s, self.t)

    def from_minimal(self, point):
        return untransform_point(point, self.u, self.r, self.s, self.t)


def _kraus_ok_at_2(c4, c6):
    if c6 % 4 == 3:  # c6 = -1 mod 4
        return True
    return c4 % 16 == 0 and c6 % 32 in (0, 8)


def _model_from_c_invariants(c4, c6):
    # some integral model with the given invariants; existence by the
    # standard 2- and 3-adic admissibility conditions
    for b2 in range(-5, 7):
        if b2 % 4 not in (0, 1):
            continue
        if (b2 * b2 - c4) % 24:
            continue
        b4 = (b2 * b2 - c4) // 24
        num = -(b2**3) + 36 * b2 * b4 - c6
        if num % 216:
            continue
        b6 = num // 216
        if b6 % 4 not in (0, 1):
            continue
        a1 = b2 % 2
        a3 = b6 % 2
        if (b4 - a1 * a3) % 2:
            continue
        return (a1, (b2 - a1) // 4, a3, (b4 - a1 * a3) // 2, (b6 - a3) // 4)
    raise InvariantError("no integral model for c4=%d, c6=%d" % (c4, c6))


def _vp(n, p):
    if n == 0:
        return None  # infinite
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def minimal_model(curve):
    """Global minimal model over Q with the change of coordinates.

    Scales to an integral model, removes 12th powers from the
    discriminant prime by prime subject to the 2- and 3-adic
    admissibility of the reduced (c4, c6), rebuilds a model, and solves
    for the (u, r, s, t) relating input and output; delta_in = u^12
    delta_out exactly.
    """
    den = 1
    for a in curve.a_invariants:
        den = den * a.denominator // math.gcd(den, a.denominator)
    integral = transform_curve(curve, Fraction(1, den), 0, 0, 0)
    c4, c6, delta = int(integral.c4), int(integral.c6), int(integral.delta)

    exps = {}
    for p, e in arith.factorize(delta).factors:
        if e < 12:
            continue
        cands = [e // 12]
        v = _vp(c4, p)
        if v is not None:
            cands.append(v // 4)
        v = _vp(c6, p)
        if v is not None:
            cands.append(v // 6)
        d = min(cands)
        if d > 0:
            exps[p] = d
    if 3 in exps:  # 3-adic condition: v3(c6') must not be exactly 2
        v = _vp(c6, 3)
        if v is not None and v - 6 * exps[3] == 2:
            exps[3] -= 1
    while True:
        u = 1
        for p, d in exps.items():
            u *= p**d
        c4m, c6m = c4 // u**4, c6 // u**6
        if _kraus_ok_at_2(c4m, c6m):
            break
        exps[2] = exps.get(2, 0) - 1  # one step always repairs the 2-adic condition
    exps = {p: d for p, d in exps.items() if d > 0}

    minimal = weierstrass_curve(*_model_from_c_invariants(c4m, c6m))
    u_net = Fraction(u, den)
    s = (u_net * minimal.a1 - curve.a1) / 2
    r = (u_net**2 * minimal.a2 - curve.a2 + s * curve.a1 + s * s) / 3
    t = (u_net**3 * minimal.a3 - curve.a3 - r * curve.a1) / 2
    check = transform_curve(curve, u_net, r, s, t)
    if check.a_invariants != minimal.a_invariants:
        raise InvariantError("minimal model transformation failed to verify")
    assert curve.delta == u_net**12 * minimal.delta
    return MinimalModel(minimal, u_net, r, s, t)


# ---------------------------------------------------------------------------
# reduction data


@dataclass(frozen=True)
class PrimeReduction:
    p: int
    v_delta: int
    kind: str  # "multiplicative" | "additive"
    stable: bool  # potentially multiplicative: v_p(j) < 0


@dataclass(frozen=True)
class ReductionData:
    primes: tuple
    n0: int
    n_stable: int
    n_unstable: int
    semistable: bool


def reduction_data(curve):
    """Bad-prime classification of a global minimal model.

    kind is multiplicative exactly when v_p(c4) = 0; a bad prime is
    stable when v_p(j) < 0 (bad reduction survives every base change).
    """
    if not curve.is_integral:
        raise InvariantError("reduction data needs an integral (minimal) model")
    c4 = int(curve.c4)
    delta = int(curve.delta)
    rows = []
    n0 = n_st = n_uns = 1
    for p, e in arith.factorize(delta).factors:
        vc4 = _vp(c4, p)
        multiplicative = vc4 == 0
        vj = None if vc4 is None else 3 * vc4 - e  # v_p(j), j = c4^3 / delta
        stable = vj is not None and vj < 0
        rows.append(
            PrimeReduction(
                p, e, "multiplicative" if multiplicative else "additive", stable
            )
        )
        n0 *= p
        if stable:
            n_st *= p
        else:
            n_uns *= p
    semistable = all(row.kind == "multiplicative" for row in rows)
    return ReductionData(tuple(rows), n0, n_st, n_uns, semistable)


# ---------------------------------------------------------------------------
# canonical heights


def _coeff_l1(coeffs):
    return sum(abs(c) for c in coeffs)


def _log_bigint(n):
    if n <= 0:
        raise ValueError("positive integer expected")
    if n.bit_length() <= 512:
        return math.log(n)
    shift = n.bit_length() - 64
    return math.log(n >> shift) + shift * math.log(2)


class _HeightData:
    """Per-curve certificates for both height paths (cached)."""

    def __init__(self, curve):
        if not curve.is_integral:
            raise InvariantError("height computations need an integral model")
        b2, b4, b6, b8 = (int(curve.b2), int(curve.b4), int(curve.b6), int(curve.b8))
        self.curve = curve
        self.F = [-b8, -2 * b6, -b4, 0, 1]  # numerator of x(2P)
        self.G = [b6, 2 * b4, b2, 4]  # denominator; equals (2y + a1 x + a3)^2
        self.W = [1, 0, -b4, -2 * b6, -b8]  # t^4 F(1/t)
        self.Z = [0, 4, b2, 2 * b4, b6]  # t^4 G(1/t)
        a1, b1c, r1 = arith.bezout_cofactors(self.F, self.G)
        a2, b2c, r2 = arith.bezout_cofactors(self.W, self.Z)
        self.res1, self.res2 = abs(r1), abs(r2)
        c_hi = max(_coeff_l1(self.F), _coeff_l1(self.G))
        c_lo = min(
            self.res1 / (_coeff_l1(a1) + _coeff_l1(b1c)),
            self.res2 / (_coeff_l1(a2) + _coeff_l1(b2c)),
        )
        self.mu_bound_inf = max(math.log(c_hi), -math.log(c_lo), 0.0)
        self.bad = []
        for p, _ in arith.factorize(int(curve.delta)).factors:
            vb = max(_vp(self.res1, p) or 0, _vp(self.res2, p) or 0)
            self.bad.append((p, vb))
        self.mu_bound_total = self.mu_bound_inf + sum(
            vb * math.log(p) for p, vb in self.bad
        )
        self.oracle_constant = self.mu_bound_total / 3.0  # |hhat - 4^-n h_n| <= C/4^n
        self.junk_primes = [p for p, _ in arith.factorize(self.res1).factors]


_height_cache = {}


def _height_data(curve):
    key = curve.a_invariants
    if key not in _height_cache:
        _height_cache[key] = _HeightData(curve)
    return _height_cache[key]


def _arch_series(hd, x0, terms):
    # log max(1,|x|) + sum 4^-(n+1) log(max(|F|,|G|) / max(1,|x|)^4) over the
    # real duplication orbit
    fc = [mpf(c) for c in hd.F]
    gc = [mpf(c) for c in hd.G]
    x = mpf(x0.numerator) / x0.denominator
    total = mpmath.log(max(mpf(1), abs(x)))
    quarter = mpf(1) / 4
    scale = quarter
    for _ in range(terms):
        fv = arith.poly_eval(fc, x)
        gv = arith.poly_eval(gc, x)
        m = max(abs(fv), abs(gv))
        if m == 0:
            raise NoConvergence("degenerate duplication orbit")
        total += scale * (mpmath.log(m) - 4 * mpmath.log(max(mpf(1), abs(x))))
        if gv == 0:
            raise NoConvergence("hit a two-torsion x-coordinate numerically")
        x = fv / gv
        scale *= quarter
    return total


def _exact_min_val(a, b):
    if a.unit is not None and b.unit is not None:
        return min(a.val, b.val)
    if a.unit is not None and a.val <= b.val:
        return a.val
    if b.unit is not None and b.val <= a.val:
        return b.val
    raise arith.PadicPrecisionLoss()


def _padic_series(hd, x0, p, terms, digits):
    """Exact truncated local series: returns Fraction coefficient of log p."""
    x = arith.PAdic.from_fraction(x0, p, digits)
    ell = max(0, -x.val) if x.unit is not None else 0
    acc = Fraction(0)
    weight = Fraction(1, 4)
    for _ in range(terms):
        fv = arith.padic_poly_eval(hd.F, x)
        gv = arith.padic_poly_eval(hd.G, x)
        vmin = _exact_min_val(fv, gv)
        if x.unit is not None:
            vx_neg = min(0, x.val)
        elif x.val > 0:
            vx_neg = 0
        else:
            raise arith.PadicPrecisionLoss()
        acc += weight * (-vmin + 4 * vx_neg)
        weight /= 4
        x = fv / gv
    return Fraction(ell) + acc


def _strip_primes(n, primes):
    for p in primes:
        while n % p == 0:
            n //= p
    return n


def canonical_height(curve, point, tol=DEFAULT_TOL):
    """hhat_x(P) by local decomposition to absolute accuracy tol.

    Torsion points (detected exactly) return 0.  The archimedean series
    runs in the real embedding; each bad prime contributes an exact
    valuation series; good denominator primes contribute log of the
    coprime denominator part directly.
    """
    _require_on_curve(curve, point)
    if point.is_infinity or is_torsion(curve, point):
        return 0.0
    hd = _height_data(curve)
    x0 = point.x

    bad_primes = [p for p, _ in hd.bad]
    n_series = 1 + len([1 for p, vb in hd.bad if vb > 0])
    tail_each = tol / (4 * n_series)

    terms_inf = max(
        5, math.ceil(math.log(max(hd.mu_bound_inf, 1e-9) / (3 * tail_each)) / math.log(4))
    )
    with prec.working(3 * terms_inf + 60):
        total = _arch_series(hd, x0, terms_inf)
        den_good = _strip_primes(x0.denominator, bad_primes)
        total += mpmath.log(den_good)
        for p, vb in hd.bad:
            if vb == 0 and x0.denominator % p != 0:
                continue
            bound_p = max(vb, 1) * math.log(p)
            terms_p = max(5, math.ceil(math.log(bound_p / (3 * tail_each)) / math.log(4)))
            digits = 128
            while True:
                try:
                    coeff = _padic_series(hd, x0, p, terms_p, digits)
                    break
                except arith.PadicPrecisionLoss:
                    digits *= 2
                    if digits > 1 << 14:
                        raise NoConvergence(
                            "p-adic height series lost precision at p=%d" % p
                        )
            total += (mpf(coeff.numerator) / coeff.denominator) * mpmath.log(p)
        return float(total)


def canonical_height_doubling(curve, point, tol=1e-6, work_limit=4e6):
    """Independent oracle: 4^(-n) h_x(2^n P) with certified error bound.

    Returns (value, error_bound).  Coordinates are kept as exact coprime
    integer pairs; only primes dividing the duplication resultant can
    enter the common factor, so reduction stays cheap.  The doubling
    count n targets C(E)/4^n <= tol but is capped so the final
    coordinates stay below work_limit nats; the returned error bound is
    always the honest C(E)/4^n for the n actually used.
    """
    _require_on_curve(curve, point)
    if point.is_infinity or is_torsion(curve, point):
        return 0.0, 0.0
    hd = _height_data(curve)
    c = hd.oracle_constant
    n = min(16, max(3, math.ceil(math.log(max(c, 1e-12) / tol) / math.log(4))))
    b8, b6, b4, b2 = int(curve.b8), int(curve.b6), int(curve.b4), int(curve.b2)
    a, b = point.x.numerator, point.x.denominator
    k = 0
    while k < n:
        # shrink the target once reaching it would blow the work limit;
        # after a few doublings the projection tracks 4^k hhat closely
        size = _log_bigint(max(abs(a), b, 2))
        if size * 4.0 ** (n - k) > work_limit:
            affordable = int(math.log(work_limit / max(size, 1.0)) / math.log(4))
            n = k + max(affordable, 0)
            continue
        aa, bb = a * a, b * b
        fa = aa * aa - b4 * aa * bb - 2 * b6 * a * b * bb - b8 * bb * bb
        gb = 4 * aa * a * b + b2 * aa * bb + 2 * b4 * a * b * bb + b6 * bb * bb
        if gb == 0:
            raise NoConvergence("doubling hit two-torsion")
        for p in hd.junk_primes:
            while fa % p == 0 and gb % p == 0:
                fa //= p
                gb //= p
        if gb < 0:
            fa, gb = -fa, -gb
        a, b = fa, gb
        k += 1
    value = _log_bigint(max(abs(a), b)) / 4**k
    return value, c / 4**k


def pairing(curve, p, q, tol=DEFAULT_TOL):
    """Height pairing <P,Q> = (HEIGHT_SCALE/2)(hhat_x(P+Q) - hhat_x(P) - hhat_x(Q))."""
    _require_on_curve(curve, p)
    _require_on_curve(curve, q)
    if p.is_infinity or q.is_infinity:
        return 0.0
    scale = float(HEIGHT_SCALE) / 2
    hsum = canonical_height(curve, add(curve, p, q), tol)
    return scale * (hsum - canonical_height(curve, p, tol) - canonical_height(curve, q, tol))


@dataclass(frozen=True)
class MordellWeilBasis:
    points: tuple
    gram: tuple  # rows of the pairing matrix
    regulator: float


def mw_regulator(curve, points, claimed_rank, tol=DEFAULT_TOL):
    """Gram determinant of the supplied points under the height pairing.

    Empty input gives the empty-determinant convention 1.  A determinant
    collapsing below 1e-8 of the diagonal scale means the points are
    dependent.
    """
    import numpy

    if len(points) != claimed_rank:
        raise InvariantError(
            "expected %d points, got %d" % (claimed_rank, len(points))
        )
    for pt in points:
        _require_on_curve(curve, pt)
    if claimed_rank == 0:
        return MordellWeilBasis((), (), 1.0)
    m = len(points)
    heights = [canonical_height(curve, pt, tol) for pt in points]
    gram = [[0.0] * m for _ in range(m)]
    scale = float(HEIGHT_SCALE)
    for i in range(m):
        gram[i][i] = scale * heights[i]
        for k in range(i + 1, m):
            hsum = canonical_height(curve, add(curve, points[i], points[k]), tol)
            val = (scale / 2) * (hsum - heights[i] - heights[k])
            gram[i][k] = gram[k][i] = val
    mat = numpy.array(gram, dtype=float)
    det = float(abs(numpy.linalg.det(mat)))
    diag_scale = 1.0
    for i in range(m):
        diag_scale *= max(gram[i][i], 1e-30)
    if det < 1e-8 * diag_scale:
        raise DependentPoints("supplied points are not independent")
    eigs = numpy.linalg.eigvalsh(mat)
    if min(eigs) < -1e-9:
        raise DependentPoints("pairing Gram matrix is not positive semidefinite")
    return MordellWeilBasis(tuple(points), tuple(tuple(row) for row in gram), det)


# ---------------------------------------------------------------------------
# the nonnegative differential height


def faltings_height_plus(curve):
    """(1/12)(log |delta_min| - log(|delta(tau)| (2 Im tau)^6)) over Q.

    Works on the global minimal model; the archimedean term comes from
    the AGM period lattice.  Always >= 0.
    """
    mm = minimal_model(curve)
    periods = analytic.agm_periods(mm.curve)
    with prec.working(20):
        value = (
            mpmath.log(abs(int(mm.curve.delta)))
            - analytic.log_scaled_discriminant(periods.tau)
        ) / 12
    return float(value)


# ---------------------------------------------------------------------------
# the rank-zero family y^2 = x^3 + p^2


@dataclass(frozen=True)
class FamilyCurve:
    label: str
    a_invariants: tuple
    rank: int
    gens: tuple


def ep_family(pmax):
    """Curves y^2 = x^3 + p^2 for primes p = 5 mod 9 up to pmax (rank 0)."""
    out = []
    for p in range(5, pmax + 1):
        if p % 9 == 5 and arith.is_prime(p):
            out.append(
                FamilyCurve("Ep%d" % p, (0, 0, 0, 0, p * p), 0, ())
            )
    return out
