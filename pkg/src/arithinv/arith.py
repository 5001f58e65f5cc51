"""Exact and certified-approximate arithmetic primitives.

Integer polynomials are plain coefficient sequences, constant term
first, e.g. ``[-2, 0, 1]`` is x^2 - 2.  Exact work runs on ints and
``fractions.Fraction``; approximate work runs on mpmath at the
precision configured in :mod:`arithinv.prec`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpc, mpf

from . import prec
from .errors import FactorBudgetExceeded, NoConvergence, NotSquarefree

# ---------------------------------------------------------------------------
# polynomial helpers (coefficient lists, constant term first)


def poly_normalize(coeffs):
    """Strip trailing zero coefficients; [] is the zero polynomial."""
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return c


def poly_degree(coeffs):
    c = poly_normalize(coeffs)
    return len(c) - 1 if c else -1


def poly_deriv(coeffs):
    return [i * coeffs[i] for i in range(1, len(coeffs))]


def poly_eval(coeffs, x):
    """Horner evaluation; works for int/Fraction/mpf/mpc arguments."""
    acc = 0 * x
    for c in reversed(list(coeffs)):
        acc = acc * x + c
    return acc


def _frac_rem(a, b):
    """Remainder of exact division of Fraction polynomials a by b."""
    a = [Fraction(c) for c in a]
    b = poly_normalize([Fraction(c) for c in b])
    da, db = poly_degree(a), poly_degree(b)
    if db < 0:
        raise ZeroDivisionError("polynomial division by zero")
    lead = b[-1]
    while da >= db:
        q = a[da] / lead
        for i in range(db + 1):
            a[da - db + i] -= q * b[i]
        a = poly_normalize(a)
        da = poly_degree(a)
    return a


def sturm_chain(coeffs):
    chain = [poly_normalize([Fraction(c) for c in coeffs])]
    chain.append(poly_normalize([Fraction(c) for c in poly_deriv(chain[0])]))
    while poly_degree(chain[-1]) > 0:
        r = _frac_rem(chain[-2], chain[-1])
        if not r:
            break
        chain.append([-c for c in r])
    return chain


def is_squarefree_poly(coeffs):
    """gcd(p, p') is constant, i.e. the Sturm chain ends in a nonzero constant."""
    chain = sturm_chain(coeffs)
    return bool(chain[-1]) and poly_degree(chain[-1]) == 0


def count_real_roots(coeffs):
    """Number of distinct real roots of a squarefree integer polynomial (Sturm)."""
    chain = sturm_chain(coeffs)

    def variations(signs):
        signs = [s for s in signs if s != 0]
        return sum(1 for a, b in zip(signs, signs[1:]) if a * b < 0)

    at_plus = [1 if p[-1] > 0 else -1 for p in chain if p]
    at_minus = [(1 if p[-1] > 0 else -1) * (-1) ** poly_degree(p) for p in chain if p]
    return variations(at_minus) - variations(at_plus)


def cauchy_root_bound(coeffs):
    """All complex roots lie in |z| <= 1 + max |a_i / a_n|."""
    c = poly_normalize(coeffs)
    lead = abs(c[-1])
    return 1.0 + max(abs(a) / lead for a in c[:-1]) if len(c) > 1 else 1.0


# ---------------------------------------------------------------------------
# certified root finding


@dataclass(frozen=True)
class ComplexApprox:
    """A complex value with an absolute error radius covering both parts."""

    real: mpf
    imag: mpf
    err: float

    @property
    def value(self):
        return mpc(self.real, self.imag)

    def __repr__(self):
        return "ComplexApprox(%s, %s, err=%.3g)" % (self.real, self.imag, self.err)


def _root_error_bound(coeffs, dcoeffs, z, degree):
    # Some root of p lies within deg * |p(z)/p'(z)| of z.
    pv = poly_eval(coeffs, z)
    dv = poly_eval(dcoeffs, z)
    if dv == 0:
        return float("inf")
    return float(degree * abs(pv) / abs(dv))


def _durand_kerner(coeffs, iterations):
    n = poly_degree(coeffs)
    lead = coeffs[-1]
    monic = [mpc(c) / lead for c in coeffs]
    radius = cauchy_root_bound(coeffs)
    z = [
        mpc(radius * 0.8) * mpmath.exp(mpc(0, 2 * mpmath.pi * k / n + 0.4))
        for k in range(n)
    ]
    target = mpf(2) ** (-(mpmath.mp.prec - 8))
    for _ in range(iterations):
        delta = mpf(0)
        for i in range(n):
            den = mpc(1)
            for j in range(n):
                if j != i:
                    den *= z[i] - z[j]
            if den == 0:
                den = mpc(target)
            step = poly_eval(monic, z[i]) / den
            z[i] -= step
            delta = max(delta, abs(step))
        if delta < target:
            return z
    return None


def poly_roots(coeffs, tol):
    """All complex roots of a squarefree integer polynomial, certified.

    Real roots come first (ascending), then conjugate pairs sorted by
    real part, each pair as (Im > 0 representative, its conjugate).
    Every returned error radius is <= tol.
    """
    coeffs = poly_normalize(coeffs)
    n = poly_degree(coeffs)
    if n < 1:
        raise NoConvergence("degree must be >= 1")
    if not is_squarefree_poly(coeffs):
        raise NotSquarefree("polynomial has repeated roots")
    dcoeffs = poly_deriv(coeffs)

    if n == 1:
        with prec.working(40):
            root = mpf(-coeffs[0]) / coeffs[1]
            err = _root_error_bound(coeffs, dcoeffs, root, 1)
        return [ComplexApprox(root, mpf(0), min(err, 1e-30))]

    n_real = count_real_roots(coeffs)
    extra = 80
    for _attempt in range(4):
        with prec.working(extra):
            z = _durand_kerner(coeffs, 400)
            if z is None:
                extra *= 2
                continue
            roots = _certify_roots(coeffs, dcoeffs, z, n, n_real, tol)
            if roots is not None:
                return roots
        extra *= 2
    raise NoConvergence("root iteration budget exhausted")


def _certify_roots(coeffs, dcoeffs, z, n, n_real, tol):
    # Split approximations into real / complex using the exact Sturm count.
    order = sorted(range(n), key=lambda i: abs(mpmath.im(z[i])))
    real_idx, cplx_idx = order[:n_real], order[n_real:]

    out = []
    for i in sorted(real_idx, key=lambda i: mpmath.re(z[i])):
        x = mpmath.re(z[i])
        for _ in range(6):  # Newton polish on the real axis
            dv = poly_eval(dcoeffs, x)
            if dv == 0:
                break
            x = x - poly_eval(coeffs, x) / dv
        err = _root_error_bound(coeffs, dcoeffs, x, n)
        if not err <= tol:
            return None
        out.append(ComplexApprox(x, mpf(0), err))

    upper = sorted(
        (z[i] for i in cplx_idx if mpmath.im(z[i]) > 0),
        key=lambda w: (mpmath.re(w), mpmath.im(w)),
    )
    lower = [z[i] for i in cplx_idx if mpmath.im(z[i]) <= 0]
    if 2 * len(upper) != len(cplx_idx):
        return None
    for w in upper:
        mate = min(lower, key=lambda v: abs(mpmath.conj(v) - w))
        lower.remove(mate)
        forced = (w + mpmath.conj(mate)) / 2  # exact conjugate pair
        err = _root_error_bound(coeffs, dcoeffs, forced, n)
        if not err <= tol:
            return None
        out.append(ComplexApprox(mpmath.re(forced), mpmath.im(forced), err))
        out.append(ComplexApprox(mpmath.re(forced), -mpmath.im(forced), err))
    return out


# ---------------------------------------------------------------------------
# primes and factorization

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_small_primes = None


def _sieve_primes(limit):
    global _small_primes
    if _small_primes is None:
        sieve = bytearray(b"\x01") * (limit + 1)
        sieve[:2] = b"\x00\x00"
        for p in range(2, math.isqrt(limit) + 1):
            if sieve[p]:
                start = p * p
                sieve[start :: p] = b"\x00" * ((limit - start) // p + 1)
        _small_primes = [i for i, v in enumerate(sieve) if v]
    return _small_primes


def is_prime(n):
    """Miller-Rabin with a fixed base set; deterministic below 3.3e24."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent_rho(n, budget):
    # Brent's cycle variant; returns a nontrivial factor or None.
    if n % 2 == 0:
        return 2
    used = 0
    c = 1
    while used < budget:
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        while g == 1 and used < budget:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                used += min(m, r - k)
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
                used += 1
        if 1 < g < n:
            return g
        c += 1
    return None


TRIAL_LIMIT = 10**6
RHO_BUDGET = 10**7


@dataclass(frozen=True)
class Factorization:
    sign: int
    factors: tuple  # ((prime, exponent), ...) sorted by prime

    def recompose(self):
        n = self.sign
        for p, e in self.factors:
            n *= p**e
        return n

    def as_dict(self):
        return dict(self.factors)

    def primes(self):
        return [p for p, _ in self.factors]


def factorize(n, trial_limit=TRIAL_LIMIT, rho_budget=RHO_BUDGET):
    """Factor a nonzero integer: trial division then Pollard rho."""
    if n == 0:
        raise ValueError("cannot factor 0")
    sign = -1 if n < 0 else 1
    n = abs(n)
    factors = {}

    def record(p, e=1):
        factors[p] = factors.get(p, 0) + e

    stack = [n]
    while stack:
        v = stack.pop()
        if v == 1:
            continue
        if is_prime(v):
            record(v)
            continue
        found = False
        for p in _sieve_primes(TRIAL_LIMIT):
            if p > trial_limit or p * p > v:
                break
            if v % p == 0:
                e = 0
                while v % p == 0:
                    v //= p
                    e += 1
                record(p, e)
                stack.append(v)
                found = True
                break
        if found:
            continue
        if v == 1:
            continue
        if v < trial_limit * trial_limit or is_prime(v):
            record(v)  # no factor below sqrt(v), so v is prime
            continue
        g = _brent_rho(v, rho_budget)
        if g is None:
            raise FactorBudgetExceeded("rho budget exhausted on %d" % v)
        stack.extend([g, v // g])
    return Factorization(sign, tuple(sorted(factors.items())))


def is_squarefree_int(m):
    if m in (0,):
        return False
    return all(e == 1 for _, e in factorize(m).factors)


# ---------------------------------------------------------------------------
# fundamental units of real quadratic fields (continued fractions)


@dataclass(frozen=True)
class PellUnit:
    """Fundamental unit a + b*omega of Q(sqrt(m)), omega the maximal-order generator."""

    m: int
    a: int
    b: int
    half: bool  # omega = (1+sqrt(m))/2 when m = 1 mod 4, else sqrt(m)
    norm: int

    def power_coeffs(self):
        """Coefficients (c0, c1) with unit = c0 + c1*sqrt(m)."""
        if self.half:
            return (Fraction(2 * self.a + self.b, 2), Fraction(self.b, 2))
        return (Fraction(self.a), Fraction(self.b))

    def value(self):
        c0, c1 = self.power_coeffs()
        with prec.working():
            return mpf(c0.numerator) / c0.denominator + (
                mpf(c1.numerator) / c1.denominator
            ) * mpmath.sqrt(self.m)


def _unit_norm(a, b, m, half):
    if half:
        # N(a + b*(1+sqrt m)/2) = a^2 + a*b + b^2*(1-m)/4
        return a * a + a * b + b * b * (1 - m) // 4
    return a * a - m * b * b


def pell_fundamental_solution(m):
    """Fundamental unit > 1 of the maximal order of Q(sqrt(m)), m squarefree > 1.

    Walks the continued fraction of the standard generator; the first
    convergent p/q for which p - q*conj(omega) has norm +-1 gives it.
    """
    if m <= 1 or not is_squarefree_int(m):
        raise NotSquarefree("m must be a squarefree integer > 1")
    half = m % 4 == 1
    sq = math.isqrt(m)
    if half:
        pp, qq = 1, 2  # omega = (1 + sqrt m)/2
    else:
        pp, qq = 0, 1  # omega = sqrt m
    p_prev, p_cur = 0, 1
    q_prev, q_cur = 1, 0
    limit = 20 * (sq + 2) * (m.bit_length() + 2) + 64
    for _ in range(limit):
        a = (pp + sq) // qq
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        pp = a * qq - pp
        qq = (m - pp * pp) // qq
        # candidate unit p - q*conj(omega), written over the basis {1, omega}
        if half:
            ca, cb = p_cur - q_cur, q_cur
        else:
            ca, cb = p_cur, q_cur
        nrm = _unit_norm(ca, cb, m, half)
        if abs(nrm) == 1:
            return PellUnit(m, ca, cb, half, nrm)
    raise NoConvergence("continued fraction period not found for m=%d" % m)


# ---------------------------------------------------------------------------
# exact linear algebra over Fractions


def frac_det(rows):
    """Exact determinant by fraction Gaussian elimination."""
    a = [[Fraction(x) for x in row] for row in rows]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            if a[r][col] == 0:
                continue
            f = a[r][col] * inv
            for c in range(col, n):
                a[r][c] -= f * a[col][c]
    return det


def frac_solve(rows, rhs):
    """Solve the square exact system rows * x = rhs over Fractions."""
    a = [[Fraction(x) for x in row] for row in rows]
    b = [Fraction(x) for x in rhs]
    n = len(a)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        inv = 1 / a[col][col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col] * inv
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
                b[r] -= f * b[col]
    return [b[i] / a[i][i] for i in range(n)]


def charpoly(rows):
    """Characteristic polynomial of a square Fraction matrix (Faddeev-LeVerrier).

    Returned constant-first and monic: [c_0, ..., c_{d-1}, 1].
    """
    m = [[Fraction(x) for x in row] for row in rows]
    d = len(m)
    coeffs = [Fraction(0)] * d + [Fraction(1)]
    aux = [[Fraction(1) if i == j else Fraction(0) for j in range(d)] for i in range(d)]
    for k in range(1, d + 1):
        prod = [
            [sum(m[i][t] * aux[t][j] for t in range(d)) for j in range(d)]
            for i in range(d)
        ]
        ck = -sum(prod[i][i] for i in range(d)) / k
        coeffs[d - k] = ck
        aux = [
            [prod[i][j] + (ck if i == j else 0) for j in range(d)] for i in range(d)
        ]
    return coeffs


def sylvester_matrix(f, g):
    f = poly_normalize(f)
    g = poly_normalize(g)
    n, m = poly_degree(f), poly_degree(g)
    size = n + m
    rows = []
    frev = list(reversed(f))
    grev = list(reversed(g))
    for i in range(m):
        rows.append([0] * i + frev + [0] * (size - n - 1 - i))
    for i in range(n):
        rows.append([0] * i + grev + [0] * (size - m - 1 - i))
    return rows


def resultant(f, g):
    """Res(f, g); for monic f this is the product of g over the roots of f."""
    f = poly_normalize(f)
    g = poly_normalize(g)
    n, m = poly_degree(f), poly_degree(g)
    if n < 0 or m < 0:
        return Fraction(0)
    if m == 0:
        return Fraction(g[0]) ** n
    if n == 0:
        return Fraction(f[0]) ** m
    return frac_det(sylvester_matrix(f, g))


def bezout_cofactors(f, g):
    """Integer polynomials (A, B) with A*f + B*g = Res(f, g) (f, g coprime).

    deg A < deg g and deg B < deg f; used for uniform lower bounds on
    max(|f(x)|, |g(x)|).
    """
    f = poly_normalize(f)
    g = poly_normalize(g)
    n, m = poly_degree(f), poly_degree(g)
    res = resultant(f, g)
    if res == 0:
        raise ValueError("polynomials share a root")
    size = n + m
    # unknowns: A_0..A_{m-1}, B_0..B_{n-1}; rows: coefficient of x^t in A f + B g
    rows = []
    for t in range(size):
        row = []
        for i in range(m):
            k = t - i
            row.append(Fraction(f[k]) if 0 <= k <= n else Fraction(0))
        for j in range(n):
            k = t - j
            row.append(Fraction(g[k]) if 0 <= k <= m else Fraction(0))
        rows.append(row)
    rhs = [res] + [Fraction(0)] * (size - 1)
    sol = frac_solve(rows, rhs)
    acoef = [int(x) for x in sol[:m]]
    bcoef = [int(x) for x in sol[m:]]
    return acoef, bcoef, int(res)


# ---------------------------------------------------------------------------
# finite-precision p-adic numbers

_PADIC_INF = 10**15


class PadicPrecisionLoss(ArithmeticError):
    """Raised when a p-adic computation cancels past its known digits."""


@dataclass(frozen=True)
class PAdic:
    """unit * p^val known to `digits` significant p-adic digits.

    ``unit is None`` encodes a value only known to be O(p^val).
    """

    p: int
    val: int
    unit: int | None
    digits: int

    GUARD = 8

    @classmethod
    def from_fraction(cls, q, p, digits):
        q = Fraction(q)
        if q == 0:
            return cls(p, _PADIC_INF, None, digits)
        num, den = q.numerator, q.denominator
        v = 0
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        pk = p**digits
        unit = num % pk * pow(den, -1, pk) % pk
        return cls(p, v, unit, digits)

    def is_unknown(self):
        return self.unit is None

    def _strip(self, p, val, s, digits):
        if s == 0:
            return PAdic(p, val + digits, None, digits)
        t = 0
        while s % p == 0:
            s //= p
            t += 1
        digits -= t
        if digits < self.GUARD:
            raise PadicPrecisionLoss()
        return PAdic(p, val + t, s % p**digits, digits)

    def __add__(self, other):
        p = self.p
        a, b = (self, other) if self.val <= other.val else (other, self)
        if a.unit is None:
            return PAdic(p, a.val, None, min(a.digits, b.digits))
        if b.unit is None:
            gap = b.val - a.val
            if gap >= a.digits:
                return PAdic(p, a.val, a.unit, a.digits)
            if gap == 0:
                return PAdic(p, a.val, None, min(a.digits, b.digits))
            digits = min(a.digits, gap)
            if digits < self.GUARD:
                raise PadicPrecisionLoss()
            return PAdic(p, a.val, a.unit % p**digits, digits)
        digits = min(a.digits, b.digits)
        gap = b.val - a.val
        pk = p**digits
        s = (a.unit + (b.unit * pow(p, gap, pk) if gap < digits else 0)) % pk
        return self._strip(p, a.val, s, digits)

    def __neg__(self):
        if self.unit is None:
            return self
        return PAdic(self.p, self.val, (-self.unit) % self.p**self.digits, self.digits)

    def __mul__(self, other):
        p = self.p
        val = min(self.val + other.val, _PADIC_INF)
        digits = min(self.digits, other.digits)
        if self.unit is None or other.unit is None:
            return PAdic(p, val, None, digits)
        return PAdic(p, val, self.unit * other.unit % p**digits, digits)

    def __truediv__(self, other):
        if other.unit is None:
            raise PadicPrecisionLoss()  # denominator valuation not pinned down
        p = self.p
        digits = min(self.digits, other.digits)
        inv = pow(other.unit, -1, p**digits)
        if self.unit is None:
            return PAdic(p, self.val - other.val, None, digits)
        return PAdic(
            p, self.val - other.val, self.unit * inv % p**digits, digits
        )


def padic_poly_eval(coeffs, x):
    """Horner evaluation of an integer polynomial at a PAdic point."""
    p, digits = x.p, x.digits
    acc = PAdic.from_fraction(0, p, digits)
    for c in reversed(list(coeffs)):
        acc = acc * x + PAdic.from_fraction(c, p, digits)
    return acc
