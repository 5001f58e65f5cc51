"""Every inequality of interest as a named, machine-checkable instance.

Each check produces rows with an explicit margin; the convention is
always ``lhs >= rhs`` with ``margin = lhs - rhs`` and a pass verdict iff
``margin >= -1e-9``.  Checks whose constant is only known to exist
(rather than stated) are report-only: they publish the implied constant
and never fail.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from . import analytic, prec
from .errors import DependentPoints, NotASubfield

PASS_EPS = 1e-9

PI = math.pi


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    object_label: str
    lhs: float
    rhs: float
    margin: float
    verdict: str  # "pass" | "fail" | "report-only"
    note: str = ""


def _judge(check_id, label, lhs, rhs, note=""):
    margin = lhs - rhs
    verdict = "pass" if margin >= -PASS_EPS else "fail"
    return CheckResult(check_id, label, lhs, rhs, margin, verdict, note)


def _report(check_id, label, lhs, rhs, note):
    return CheckResult(check_id, label, lhs, rhs, lhs - rhs, "report-only", note)


# ---------------------------------------------------------------------------
# explicit constants


class Constants:
    """The explicit constants used by the pass/fail checks."""

    friedman_a = 0.0031
    friedman_b = 0.241  # coefficient of the degree
    friedman_c = 0.497  # coefficient of r1
    fs_c1 = 1.0 / 11.5**39
    fs_c2 = 1.15

    @staticmethod
    def c5(d, log_disc):
        """Rank bound constant (2^26 3^8 + 2^8 log 16) d^3 + 2^8 d log|D|."""
        return (2**26 * 3**8 + 2**8 * math.log(16)) * d**3 + 2**8 * d * log_disc


CONSTANTS = Constants()


# ---------------------------------------------------------------------------
# per-object contexts assembled by the corpus layer


@dataclass(frozen=True)
class FieldStats:
    label: str
    degree: int
    r1: int
    r2: int
    disc: int
    w: int
    regulator: float
    r0: int | None
    subfield_label: str | None
    is_cm: bool

    @property
    def unit_rank(self):
        return self.r1 + self.r2 - 1


@dataclass(frozen=True)
class CurveStats:
    label: str
    a_invariants: tuple  # minimal model
    delta_min: int
    n0: int
    n_stable: int
    n_unstable: int
    semistable: bool
    tau_im: float  # Im of the reduced period ratio; rho^(-2)
    h_faltings: float
    rank: int
    gen_heights: tuple  # polarized heights of the supplied generators
    gram: tuple  # pairing Gram rows (empty for rank 0)
    regulator: float
    degree: int = 1
    log_disc_base: float = 0.0


# ---------------------------------------------------------------------------
# number field checks


def check_hermite_minkowski(fs):
    """|D|^(1/2) >= (pi/4)^r2 d^d/d!  and, for d >= 2, |D| >= (pi/3)(3pi/4)^(d-1)."""
    d = fs.degree
    out = [
        _judge(
            "hermite_minkowski_a",
            fs.label,
            math.sqrt(abs(fs.disc)),
            (PI / 4) ** fs.r2 * d**d / math.factorial(d),
        )
    ]
    if d >= 2:
        out.append(
            _judge(
                "hermite_minkowski_b",
                fs.label,
                float(abs(fs.disc)),
                (PI / 3) * (3 * PI / 4) ** (d - 1),
            )
        )
    return out


def check_friedman(fs):
    """R/w >= 0.0031 exp(0.241 d + 0.497 r1)."""
    rhs = CONSTANTS.friedman_a * math.exp(
        CONSTANTS.friedman_b * fs.degree + CONSTANTS.friedman_c * fs.r1
    )
    return _judge("friedman", fs.label, fs.regulator / fs.w, rhs)


def check_friedman_skoruppa(fs_top, fs_sub):
    """R_L / R_K >= (c1 c2^[L:K])^[K:Q] for a certified subfield K of L."""
    if fs_top.subfield_label != fs_sub.label:
        raise NotASubfield(
            "%s does not declare %s as subfield" % (fs_top.label, fs_sub.label)
        )
    if fs_top.degree % fs_sub.degree:
        raise NotASubfield("degree of %s does not divide" % fs_sub.label)
    rel_degree = fs_top.degree // fs_sub.degree
    rhs = (CONSTANTS.fs_c1 * CONSTANTS.fs_c2**rel_degree) ** fs_sub.degree
    note = "relative degree %d; bound %.3e" % (rel_degree, rhs)
    return _judge(
        "friedman_skoruppa",
        "%s/%s" % (fs_top.label, fs_sub.label),
        fs_top.regulator / fs_sub.regulator,
        rhs,
        note,
    )


def implied_c3(fs):
    """R d^(2d) (log(|D|/d^d))^(r0-r), or None where the bound is vacuous.

    Vacuous cases: unit rank equals r0 (the CM-type degeneration), or
    |D| <= d^d so the logarithm is not positive and any constant works.
    """
    r0 = fs.r0 if fs.r0 is not None else 0
    gap = fs.unit_rank - r0
    if gap <= 0:
        return None
    base = math.log(abs(fs.disc) / fs.degree**fs.degree)
    if base <= 0:
        return None
    return fs.regulator * fs.degree ** (2 * fs.degree) * base**-gap


def report_silverman_friedman(fs):
    c3 = implied_c3(fs)
    if c3 is not None:
        return _report(
            "silverman_friedman_c3", fs.label, c3, 0.0, "implied c3 = %.6g" % c3
        )
    r0 = fs.r0 if fs.r0 is not None else 0
    if fs.unit_rank - r0 <= 0:
        note = "exponent zero (unit rank equals r0): bound reads R >= c3 d^(-2d)"
    else:
        note = "log(|D|/d^d) <= 0: instance carries no constant information"
    return _report("silverman_friedman_c3", fs.label, fs.regulator, 0.0, note)


# ---------------------------------------------------------------------------
# elliptic curve checks


def check_semistable_height_bound(cs):
    """h+ >= (1/12d) log N0 for semistable curves."""
    if not cs.semistable:
        return _report(
            "semistable_height", cs.label, 0.0, 0.0, "skipped: not semistable"
        )
    rhs = math.log(cs.n0) / (12 * cs.degree)
    return _judge("semistable_height", cs.label, cs.h_faltings, rhs)


def check_general_height_bound(cs):
    """h+ >= (1/12^8 d) log N0 with no semistability assumption."""
    rhs = math.log(cs.n0) / (12**8 * cs.degree)
    return _judge("general_height", cs.label, cs.h_faltings, rhs)


LOG_PI_TERM = math.log(PI / (PI - 3))


def check_injectivity_theorem(cs):
    """The explicit height / bad-reduction / injectivity-diameter bounds.

    Matrix-lemma instance: 2 h+ + log(pi/(pi-3)) >= sum d_v rho^(-2) / d,
    which over Q is Im tau.  Main bound: h+ >= log(N0)/(3*12^8 d)
    + Im tau/(3d) - log(pi/(pi-3))/3.
    """
    d = cs.degree
    rho_term = cs.tau_im  # rho^(-2) = Im tau at the single real place
    matrix = _judge(
        "injectivity_matrix",
        cs.label,
        2 * cs.h_faltings + LOG_PI_TERM,
        rho_term / d,
    )
    main_rhs = (
        math.log(cs.n0) / (3 * 12**8 * d) + rho_term / (3 * d) - LOG_PI_TERM / 3
    )
    main = _judge("injectivity_main", cs.label, cs.h_faltings, main_rhs)
    return [main, matrix]


def check_rank_bound(cs):
    """rank <= c5 max(1, h+)."""
    c5 = CONSTANTS.c5(cs.degree, cs.log_disc_base)
    return _judge(
        "rank_bound",
        cs.label,
        c5 * max(1.0, cs.h_faltings),
        float(cs.rank),
        "c5 = %.6e" % c5,
    )


def report_lang_silverman(cs):
    """Implied c4: min over generators of h(P) / max(h+, 1)."""
    if cs.rank == 0 or not cs.gen_heights:
        return _report(
            "lang_silverman_c4", cs.label, 0.0, 0.0, "skipped: no dense point"
        )
    c4 = min(cs.gen_heights) / max(cs.h_faltings, 1.0)
    return _report("lang_silverman_c4", cs.label, c4, 0.0, "implied c4 = %.6g" % c4)


# ---------------------------------------------------------------------------
# successive minima of the height lattice


@dataclass(frozen=True)
class MinimaResult:
    minima: tuple  # lambda_1 <= ... <= lambda_m
    witnesses: tuple  # independent integer coefficient vectors
    exact: bool
    box: int
    needed_box: int


def _rank_increases(rows, candidate):
    mat = [list(r) for r in rows] + [[Fraction(int(x)) for x in candidate]]
    n, m = len(mat), len(mat[0])
    rank = 0
    for col in range(m):
        piv = next((r for r in range(rank, n) if mat[r][col] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = 1 / mat[rank][col]
        for r in range(rank + 1, n):
            if mat[r][col] != 0:
                f = mat[r][col] * inv
                for c in range(col, m):
                    mat[r][c] -= f * mat[rank][c]
        rank += 1
    return rank == n


_MAX_BOX = {1: 10**6, 2: 1024, 3: 128, 4: 40}


def _enumerate_candidates(q_mat, box, keep):
    """Smallest `keep` form values over [-box, box]^m \\ {0}, chunked.

    Returns a deterministic list of (value, vector) pairs sorted by
    value then vector.
    """
    import numpy as np

    m = q_mat.shape[0]
    axis = np.arange(-box, box + 1)
    if m > 1:
        tail_grids = np.meshgrid(*([axis] * (m - 1)), indexing="ij")
        tail = np.stack([g.ravel() for g in tail_grids], axis=1)
    else:
        tail = np.zeros((1, 0), dtype=int)
    best_vals = np.empty(0)
    best_vecs = np.empty((0, m), dtype=int)
    for x0 in axis:
        vectors = np.concatenate(
            [np.full((tail.shape[0], 1), x0, dtype=int), tail], axis=1
        )
        if x0 == 0:
            vectors = vectors[np.any(vectors != 0, axis=1)]
            if vectors.shape[0] == 0:
                continue
        values = np.einsum("ni,ij,nj->n", vectors, q_mat, vectors)
        best_vals = np.concatenate([best_vals, values])
        best_vecs = np.concatenate([best_vecs, vectors])
        if best_vals.shape[0] > keep:
            part = np.argpartition(best_vals, keep - 1)[:keep]
            best_vals, best_vecs = best_vals[part], best_vecs[part]
    pairs = [
        (float(v), tuple(int(x) for x in c)) for v, c in zip(best_vals, best_vecs)
    ]
    pairs.sort()
    return pairs


def _greedy_independent(pairs, m):
    chosen, minima, rows = [], [], []
    for value, vec in pairs:
        if _rank_increases(rows, vec):
            rows.append([Fraction(x) for x in vec])
            chosen.append(vec)
            minima.append(math.sqrt(max(value, 0.0)))
            if len(chosen) == m:
                break
    return minima, chosen


def successive_minima(gram, box=20):
    """Exhaustive successive minima of a positive definite Gram matrix.

    Enumerates integer vectors with coordinates in [-box, box].  The
    search is certified exact when box >= ceil(sqrt(lambda_m^2 *
    max_i (Q^-1)_ii)); if the starting box falls short it is enlarged up
    to a dimension-dependent cap, after which the result is flagged
    box-limited.
    """
    import numpy as np

    m = len(gram)
    if m == 0:
        return MinimaResult((), (), True, box, 0)
    q_mat = np.asarray(gram, dtype=float)
    if np.min(np.linalg.eigvalsh(q_mat)) <= 0:
        raise DependentPoints("Gram matrix is not positive definite")
    inv_diag_max = float(np.max(np.diag(np.linalg.inv(q_mat))))
    cap = _MAX_BOX.get(m, 12)
    while True:
        keep = 64 * m
        total = (2 * box + 1) ** m - 1
        while True:
            pairs = _enumerate_candidates(q_mat, box, keep)
            minima, chosen = _greedy_independent(pairs, m)
            if len(chosen) == m or keep >= total:
                break
            keep = min(4 * keep, total)
        needed = (
            math.ceil(math.sqrt(minima[-1] ** 2 * inv_diag_max))
            if len(chosen) == m
            else box + 1
        )
        if len(chosen) == m and box >= needed:
            return MinimaResult(tuple(minima), tuple(chosen), True, box, needed)
        if needed > cap or box >= cap:
            return MinimaResult(tuple(minima), tuple(chosen), False, box, needed)
        box = min(max(needed, box + 1), cap)


def check_regulator_theorem(cs, box=20):
    """Minkowski product bound plus the implied regulator constant.

    (a) the product of the quadratic-form minima lambda_i^2 is at most
        m^(m/2) Reg -- equality in rank 1 when the supplied point
        generates (pass/fail);
    (b) report-only implied c10 = Reg^(2/m) / max(h+, 1).
    """
    if cs.rank == 0 or not cs.gram:
        return []
    m = cs.rank
    result = successive_minima(cs.gram, box)
    product = 1.0
    for lam in result.minima:
        product *= lam * lam
    note = "minima %s%s" % (
        "/".join("%.6g" % x for x in result.minima),
        "" if result.exact else " (box-limited at %d)" % result.box,
    )
    minkowski = _judge(
        "minkowski_minima", cs.label, m ** (m / 2) * cs.regulator, product, note
    )
    c10 = cs.regulator ** (2.0 / m) / max(cs.h_faltings, 1.0)
    report = _report(
        "regulator_c10", cs.label, c10, 0.0, "implied c10 = %.6g" % c10
    )
    return [minkowski, report]


# ---------------------------------------------------------------------------
# analytic estimates and corpus scans


def _sample_reduced_tau(count, seed=20260809):
    rng = random.Random(seed)
    points = [mpmath.mpc(0, 1), mpmath.mpc(0.5, math.sqrt(3) / 2)]
    while len(points) < count + 2:
        re = rng.uniform(-0.5, 0.4999)
        im = rng.uniform(0.867, 3.0)
        if re * re + im * im >= 1.0001:
            points.append(mpmath.mpc(re, im))
    return points


def check_analytic_estimates(samples=100):
    """The two archimedean estimates behind the semistable height bound."""
    with prec.working(20):
        series = float(
            mpmath.fsum(
                mpmath.log(1 + mpmath.exp(-mpmath.sqrt(3) * mpmath.pi * n))
                for n in range(1, 80)
            )
        )
    series_row = _judge(
        "analytic_series",
        "q-tail",
        0.005,
        series,
        "series value %.6f" % series,
    )
    worst = min(
        -float(analytic.log_scaled_discriminant(z))
        for z in _sample_reduced_tau(samples)
    )
    nonneg_row = _judge(
        "analytic_nonneg",
        "fundamental-domain",
        worst,
        0.0,
        "min of -log(|delta| (2 Im)^6) over %d reduced points" % (samples + 2),
    )
    return [series_row, nonneg_row]


def northcott_fields(field_stats, bound):
    hits = sorted(f.label for f in field_stats if not f.is_cm and f.regulator <= bound)
    return _report(
        "northcott_fields",
        "(corpus)",
        float(len(hits)),
        bound,
        "non-CM fields with R <= %g: %s" % (bound, ", ".join(hits) or "(none)"),
    )


def northcott_curves(curve_stats, bound):
    hits = sorted(
        c.label for c in curve_stats if c.rank > 0 and c.regulator <= bound
    )
    return _report(
        "northcott_curves",
        "(corpus)",
        float(len(hits)),
        bound,
        "positive-rank curves with Reg <= %g: %s" % (bound, ", ".join(hits) or "(none)"),
    )


# ---------------------------------------------------------------------------
# the full run


ALL_CHECKS = (
    "analytic_nonneg",
    "analytic_series",
    "friedman",
    "friedman_skoruppa",
    "general_height",
    "hermite_minkowski_a",
    "hermite_minkowski_b",
    "injectivity_main",
    "injectivity_matrix",
    "lang_silverman_c4",
    "minkowski_minima",
    "northcott_curves",
    "northcott_fields",
    "rank_bound",
    "regulator_c10",
    "semistable_height",
    "silverman_friedman_c3",
)

_CHECK_ALIASES = {"hm": ("hermite_minkowski_a", "hermite_minkowski_b")}


def expand_selection(tokens):
    """Map filter tokens to check ids: exact ids, aliases, or prefixes."""
    wanted = set()
    for token in tokens:
        if token in _CHECK_ALIASES:
            wanted.update(_CHECK_ALIASES[token])
        elif token in ALL_CHECKS:
            wanted.add(token)
        else:
            hits = [c for c in ALL_CHECKS if c.startswith(token)]
            if not hits:
                raise ValueError("unknown check '%s'" % token)
            wanted.update(hits)
    return wanted


def run_checks(field_stats, curve_stats, selected=None, northcott_bound=1.0):
    """All checks over the corpus, deterministically sorted by (id, object)."""
    field_stats = list(field_stats)
    curve_stats = list(curve_stats)
    by_label = {f.label: f for f in field_stats}
    rows = []
    rows.extend(check_analytic_estimates())
    for fs in field_stats:
        rows.extend(check_hermite_minkowski(fs))
        rows.append(check_friedman(fs))
        rows.append(report_silverman_friedman(fs))
        if fs.subfield_label and fs.subfield_label in by_label:
            rows.append(check_friedman_skoruppa(fs, by_label[fs.subfield_label]))
    c3_values = [v for v in (implied_c3(f) for f in field_stats) if v is not None]
    if c3_values:
        rows.append(
            _report(
                "silverman_friedman_c3",
                "(corpus)",
                min(c3_values),
                0.0,
                "corpus minimum of implied c3",
            )
        )
    c4_values = []
    for cs in curve_stats:
        rows.append(check_semistable_height_bound(cs))
        rows.append(check_general_height_bound(cs))
        rows.extend(check_injectivity_theorem(cs))
        rows.append(check_rank_bound(cs))
        rows.append(report_lang_silverman(cs))
        rows.extend(check_regulator_theorem(cs))
        if cs.rank > 0 and cs.gen_heights:
            c4_values.append(min(cs.gen_heights) / max(cs.h_faltings, 1.0))
    if c4_values:
        rows.append(
            _report(
                "lang_silverman_c4",
                "(corpus)",
                min(c4_values),
                0.0,
                "corpus minimum of implied c4",
            )
        )
    rows.append(northcott_fields(field_stats, northcott_bound))
    rows.append(northcott_curves(curve_stats, northcott_bound))
    if selected is not None:
        wanted = expand_selection(selected)
        rows = [r for r in rows if r.check_id in wanted]
    return sorted(rows, key=lambda r: (r.check_id, r.object_label))
