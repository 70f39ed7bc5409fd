"""Rotation numbers, continued fractions, and dynamical partitions.

Rotation numbers are certified through exact rational comparisons: for
a monotone degree-one lift F, the displacement F^q(x) - x - p has a
zero iff the rotation number equals p/q, and otherwise has constant
sign equal to sign(rho - p/q).  Closest returns of the orbit of 0
supply candidate convergents p_n/q_n; comparing against each produces
an alternating certified bracket whose gap 1/(q_n q_{n+1}) contracts
exponentially.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels
from .circlemap import AnalyticCircleMap, SolverError

GOLDEN_MEAN = (math.sqrt(5.0) - 1.0) / 2.0
SILVER_MEAN = math.sqrt(2.0) - 1.0


class Comparison(enum.Enum):
    BELOW = -1   # rho(f) < p/q
    EQUAL = 0    # a p/q-periodic orbit exists
    ABOVE = 1    # rho(f) > p/q


# ---------------------------------------------------------------------------
# continued fractions


@dataclass(frozen=True)
class ContinuedFractionExpansion:
    """Partial quotients [k_0; k_1, k_2, ...] with exact convergents.

    Convergents are indexed from 0: p_0/q_0 = k_0/1 and p_n/q_n uses
    quotients k_0..k_n, so for the golden mean the ladder reads
    0/1, 1/1, 1/2, 2/3, 3/5, ...
    """

    quotients: tuple[int, ...]
    finite: bool = False

    def __post_init__(self):
        qs = tuple(int(k) for k in self.quotients)
        if not qs:
            raise ValueError("empty quotient list")
        if any(k < 1 for k in qs[1:]):
            raise ValueError("partial quotients k_i must be >= 1 for i >= 1")
        object.__setattr__(self, "quotients", qs)

    @property
    def ell(self) -> int | None:
        """Expansion length for rational numbers, None otherwise."""
        return len(self.quotients) if self.finite else None

    def convergents(self) -> list[tuple[int, int]]:
        out = []
        p_m2, q_m2 = 1, 0
        p_m1, q_m1 = self.quotients[0], 1
        out.append((p_m1, q_m1))
        for k in self.quotients[1:]:
            p = k * p_m1 + p_m2
            q = k * q_m1 + q_m2
            out.append((p, q))
            p_m2, q_m2, p_m1, q_m1 = p_m1, q_m1, p, q
        return out

    def value(self) -> float:
        p, q = self.convergents()[-1]
        return p / q

    def bracket(self) -> tuple[Fraction, Fraction]:
        """Tightest (lower, upper) rational bracket from the deepest pair."""
        conv = self.convergents()
        if len(conv) == 1:
            p, q = conv[0]
            v = Fraction(p, q)
            return v, v
        a = Fraction(*conv[-2])
        b = Fraction(*conv[-1])
        return (a, b) if a < b else (b, a)

    @classmethod
    def golden(cls, depth: int = 40) -> "ContinuedFractionExpansion":
        return cls((0,) + (1,) * (depth - 1))

    @classmethod
    def silver(cls, depth: int = 30) -> "ContinuedFractionExpansion":
        return cls((0,) + (2,) * (depth - 1))


def cf_expand(alpha: float, depth: int = 32) -> ContinuedFractionExpansion:
    """Gauss-map expansion of a real number.

    Stops early when the remainder is rational to within 1e-15 of the
    working float, or when the convergent denominators exhaust double
    precision.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    x = float(alpha)
    k0 = math.floor(x)
    quots = [int(k0)]
    y = x - k0
    finite = False
    q_m2, q_m1 = 0, 1
    for _ in range(depth - 1):
        if y <= 1e-15:
            finite = True
            break
        inv = 1.0 / y
        k = int(math.floor(inv))
        if k > 2 ** 40:
            finite = True
            break
        q = k * q_m1 + q_m2
        if q > 2 ** 26:
            # Float input cannot distinguish deeper quotients.
            break
        quots.append(k)
        q_m2, q_m1 = q_m1, q
        y = inv - k
    return ContinuedFractionExpansion(tuple(quots), finite=finite)


def convergents(alpha_or_expansion, depth: int = 32) -> list[tuple[int, int]]:
    """Convergent ladder of a real number or an expansion."""
    if isinstance(alpha_or_expansion, ContinuedFractionExpansion):
        return alpha_or_expansion.convergents()
    return cf_expand(float(alpha_or_expansion), depth).convergents()


# ---------------------------------------------------------------------------
# rational comparisons


def _sample_margin(q: int, extra: float = 0.0) -> float:
    return 1e-12 + 1e-14 * q + extra


def _compare_sample(map_like, p: int, q: int, x0: float = 0.0):
    """Sign of F^q(x0) - x0 - p with a rounding margin.

    Returns (Comparison or None, sample); None means the sample is too
    close to zero to be trusted and the caller must escalate.
    """
    args = map_like.kernel_args()
    s, _ = _kernels.displacement_sum(*args, x0, q)
    d = s - p
    if abs(d) <= _sample_margin(q):
        return None, d
    return (Comparison.ABOVE if d > 0 else Comparison.BELOW), d


def compare_to_rational(map_like, p: int, q: int, grid: int = 4096) -> Comparison:
    """Certified comparison of rho(f) with p/q.

    ABOVE iff min_x(F^q(x) - x - p) > 0, BELOW iff the maximum is
    negative, EQUAL otherwise (a p/q-periodic point exists).  Extrema
    are located on a grid and polished locally.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if math.gcd(int(p), int(q)) != 1:
        raise ValueError(f"p/q = {p}/{q} must be in lowest terms")
    if hasattr(map_like, "require_homeomorphism"):
        map_like.require_homeomorphism()
    # Keep the total work of the grid stage bounded for deep denominators;
    # local polishing recovers the extremum location regardless of grid.
    grid = max(256, min(grid, int(2e7 // max(q, 1))))
    x = (np.arange(grid) + 0.5) / grid
    s = np.zeros(grid)
    comp = np.zeros(grid)
    for _ in range(q):
        d = map_like.displacement(x)
        y = d - comp
        t = s + y
        comp = (t - s) - y
        s = t
        x = (x + d) % 1.0
    d = s - p
    args = map_like.kernel_args()

    def disp_at(t: float) -> float:
        val, _ = _kernels.displacement_sum(*args, t, q)
        return val - p

    i_min = int(np.argmin(d))
    i_max = int(np.argmax(d))
    h = 1.0 / grid
    lo_min = minimize_scalar(disp_at, bounds=((i_min - 0.5) * h, (i_min + 1.5) * h),
                             method="bounded", options={"xatol": 1e-13})
    hi_max = minimize_scalar(lambda t: -disp_at(t),
                             bounds=((i_max - 0.5) * h, (i_max + 1.5) * h),
                             method="bounded", options={"xatol": 1e-13})
    d_min = min(float(d.min()), float(lo_min.fun))
    d_max = max(float(d.max()), -float(hi_max.fun))
    margin = _sample_margin(q)
    if d_min > margin:
        return Comparison.ABOVE
    if d_max < -margin:
        return Comparison.BELOW
    return Comparison.EQUAL


def compare_certified(map_like, p: int, q: int) -> Comparison:
    """Fast comparison: single-orbit sign test, grid-certified fallback.

    For a monotone lift the displacement F^q(x) - x - p has constant
    sign whenever rho != p/q, so one well-conditioned sample decides
    the comparison; only near-zero samples need the extremum search.
    """
    verdict, _ = _compare_sample(map_like, p, q)
    if verdict is not None:
        return verdict
    return compare_to_rational(map_like, p, q)


# ---------------------------------------------------------------------------
# rotation number analysis


@dataclass(frozen=True)
class RotationAnalysis:
    """Certified rotation data for one circle map.

    ladder holds certified convergents (p, q) in order of increasing
    depth; verdicts holds the matching comparisons.  certified means a
    rigorous enclosure lower <= rho <= upper was established by exact
    sign tests (gap = upper - lower, possibly wider than the tolerance
    requested when the orbit budget ran out); a single positive sample
    of F^q(x) - x - p rules out rho < p/q, hence the enclosure is
    closed.  For rational rho the exact fraction is stored and the
    enclosure collapses.  Without any enclosure, rho carries a plain
    Birkhoff estimate and fallback_error bounds its accuracy.
    """

    ladder: tuple[tuple[int, int], ...]
    verdicts: tuple[Comparison, ...]
    quotients: tuple[int, ...]
    rho: float
    lower: Fraction | None
    upper: Fraction | None
    gap: float
    certified: bool
    rational: Fraction | None
    orbit_used: int
    fallback_error: float | None

    @property
    def return_times(self) -> tuple[int, ...]:
        out: list[int] = []
        for _, q in self.ladder:
            if not out or q != out[-1]:
                out.append(q)
        return tuple(out)


_ANALYSIS_CACHE: dict[object, tuple[RotationAnalysis, int]] = {}


def _detect_records(map_like, budget: int, qq_target: float, max_records: int):
    args = map_like.kernel_args()
    times, disps, dists, used, total = _kernels.closest_return_scan(
        args[0], args[1], args[2], args[3], args[4], args[5],
        budget, qq_target, max_records)
    return list(times), list(disps), list(dists), int(used), float(total)


def _euclid_quotients(value: Fraction) -> tuple[int, ...]:
    p, q = value.numerator, value.denominator
    out: list[int] = []
    while True:
        k, r = divmod(p, q)
        out.append(int(k))
        if r == 0:
            return tuple(out)
        p, q = q, r


def _recover_quotients(ladder: list[tuple[int, int]]) -> tuple[int, ...]:
    if not ladder:
        return ()
    quots = [ladder[0][0]]
    qs = [q for _, q in ladder]
    for n in range(1, len(ladder)):
        q_prev2 = qs[n - 2] if n >= 2 else 0
        num = qs[n] - q_prev2
        if num % qs[n - 1] != 0:
            raise SolverError("closest-return times violate the convergent "
                              "recurrence; orbit accuracy fault")
        k = num // qs[n - 1]
        if k < 1:
            raise SolverError("nonpositive recovered partial quotient")
        quots.append(k)
    return tuple(quots)


def _identify_rational(map_like, estimate: float, lower, upper):
    """Exactly test the plausible rational values near a stalled estimate."""
    conv = cf_expand(estimate, 24).convergents()
    cands = []
    for p, q in conv:
        if q > 50_000:
            break
        val = Fraction(p, q)
        if lower is not None and val < lower:
            continue
        if upper is not None and val > upper:
            continue
        cands.append((p, q))
    for p, q in reversed(cands[-2:]):
        if compare_to_rational(map_like, p, q) is Comparison.EQUAL:
            return Fraction(p, q)
    return None


def analyze_rotation(map_like, tol: float = 1e-10, budget: int = 1_000_000,
                     min_records: int = 0) -> RotationAnalysis:
    """Closest-return scan plus certification of the convergent ladder."""
    if hasattr(map_like, "require_homeomorphism"):
        map_like.require_homeomorphism()
    key = map_like
    cached = _ANALYSIS_CACHE.get(key)
    if cached is not None:
        ana, c_budget = cached
        if ana.rational is not None:
            return ana
        deep_enough = len(ana.ladder) >= min_records
        tight_enough = tol <= 0.0 or ana.gap <= tol
        exhausted = ana.orbit_used >= c_budget
        if (deep_enough and tight_enough) or (exhausted and c_budget >= budget):
            return ana

    qq_target = 1.0 / tol if tol > 0 else 2.0 ** 62
    if min_records:
        qq_target = 2.0 ** 62
    max_records = (min_records + 2) if min_records else 64
    times, disps, dists, used, total = _detect_records(
        map_like, budget, qq_target, max_records)

    # Candidate convergents from displacement rounding at record times.
    ladder: list[tuple[int, int]] = []
    samples: list[float] = []
    for t, s in zip(times, disps):
        p = int(round(s))
        ladder.append((p, int(t)))
        samples.append(s - p)
    if ladder and ladder[0][1] == 1 and samples[0] < 0.0:
        # round(F(0)) overshot rho, so the depth-0 convergent floor(rho)/1
        # sits one integer lower and must head the ladder.
        ladder.insert(0, (ladder[0][0] - 1, 1))
        samples.insert(0, samples[0] + 1.0)

    verdicts: list[Comparison] = []
    rational: Fraction | None = None
    certified_ladder: list[tuple[int, int]] = []
    for (p, q), sample in zip(ladder, samples):
        if abs(sample) <= _sample_margin(q):
            verdict = compare_to_rational(map_like, p, q)
        else:
            verdict = Comparison.ABOVE if sample > 0 else Comparison.BELOW
        if verdict is Comparison.EQUAL:
            rational = Fraction(p, q)
            certified_ladder.append((p, q))
            verdicts.append(verdict)
            break
        certified_ladder.append((p, q))
        verdicts.append(verdict)

    if rational is not None:
        ana = RotationAnalysis(
            ladder=tuple(certified_ladder), verdicts=tuple(verdicts),
            quotients=_euclid_quotients(rational),
            rho=float(rational), lower=rational, upper=rational, gap=0.0,
            certified=True, rational=rational, orbit_used=used,
            fallback_error=None)
        _ANALYSIS_CACHE[key] = (ana, budget)
        return ana

    # Alternation check: verdicts must flip side at each depth.
    for a, b in zip(verdicts, verdicts[1:]):
        if a is b:
            raise SolverError("closest-return ladder does not alternate; "
                              "orbit accuracy fault")

    quots = _recover_quotients(certified_ladder)
    lower = None
    upper = None
    for (p, q), v in zip(certified_ladder, verdicts):
        val = Fraction(p, q)
        if v is Comparison.ABOVE:
            lower = val if lower is None or val > lower else lower
        else:
            upper = val if upper is None or val < upper else upper
    certified = lower is not None and upper is not None
    gap = float(upper - lower) if certified else math.inf
    birkhoff = total / max(used, 1)
    if used >= budget and gap > max(tol, 1e-15):
        # Orbit budget exhausted with a wide bracket: typical of a
        # mode-locked map whose orbit stalls at an attracting cycle.
        found = _identify_rational(map_like, birkhoff, lower, upper)
        if found is not None:
            ana = RotationAnalysis(
                ladder=tuple(certified_ladder) + ((found.numerator,
                                                   found.denominator),),
                verdicts=tuple(verdicts) + (Comparison.EQUAL,),
                quotients=_euclid_quotients(found),
                rho=float(found), lower=found, upper=found, gap=0.0,
                certified=True, rational=found, orbit_used=used,
                fallback_error=None)
            _ANALYSIS_CACHE[key] = (ana, budget)
            return ana
    if certified:
        rho = min(max(birkhoff, float(lower)), float(upper))
    else:
        rho = birkhoff
    ana = RotationAnalysis(
        ladder=tuple(certified_ladder), verdicts=tuple(verdicts),
        quotients=quots, rho=rho, lower=lower, upper=upper, gap=gap,
        certified=certified, rational=None, orbit_used=used,
        fallback_error=None if certified else 2.0 / max(used, 1))
    old = _ANALYSIS_CACHE.get(key)
    if old is None or len(ana.ladder) >= len(old[0].ladder):
        _ANALYSIS_CACHE[key] = (ana, budget)
    return ana


def rotation_number(map_like, tol: float = 1e-10,
                    budget: int = 1_000_000) -> RotationAnalysis:
    """Certified rotation number; falls back to a Birkhoff average.

    Scans until the certified bracket gap drops below tol or the orbit
    budget runs out.  The returned analysis reports the achieved gap;
    without any bracket, fallback_error bounds the Birkhoff estimate.
    """
    return analyze_rotation(map_like, tol=tol, budget=budget)


def closest_return_times(map_like, count: int = 20,
                         budget: int = 1_000_000) -> tuple[int, ...]:
    """Times of successive closest returns of the orbit of 0.

    These coincide with the convergent denominators of the rotation
    number; a mismatch with the certified ladder raises SolverError.
    """
    ana = analyze_rotation(map_like, tol=0.0, budget=budget,
                           min_records=count)
    return ana.return_times[:count]


# ---------------------------------------------------------------------------
# dynamical partitions


@dataclass(frozen=True)
class DynamicalPartition:
    """Level-n partition of the circle by the orbit of 0.

    The circle splits into q_{n+1} long intervals (images of the arc
    between 0 and f^{q_n}(0)) and q_n short ones (level n+1 arcs),
    delimited by the first q_n + q_{n+1} orbit points of 0.  Intervals
    are listed in circle order by left endpoint.
    """

    level: int
    q_low: int
    q_high: int
    lefts: np.ndarray
    lengths: np.ndarray
    interval_levels: np.ndarray
    interval_indices: np.ndarray

    def __len__(self) -> int:
        return len(self.lengths)

    def total_length(self) -> float:
        return float(self.lengths.sum())

    def adjacent_ratio_max(self) -> float:
        r = self.lengths / np.roll(self.lengths, -1)
        return float(np.maximum(r, 1.0 / r).max())


def build_partition(map_like, n: int, budget: int = 2_000_000) -> DynamicalPartition:
    """Dynamical partition of level n >= 0 for a map with irrational rho."""
    if n < 0:
        raise ValueError("partition level must be >= 0")
    ana = analyze_rotation(map_like, tol=0.0, budget=budget, min_records=n + 2)
    if ana.rational is not None:
        raise SolverError("dynamical partitions need irrational rotation number")
    if len(ana.ladder) < n + 2:
        raise SolverError(f"convergent ladder too shallow for level {n}")
    q_low = ana.ladder[n][1]
    q_high = ana.ladder[n + 1][1]
    # Orientation: rho above p_n/q_n means the level-n arc points right
    # (f^{q_n}(x) lands just right of x), so a long interval runs from
    # orbit index k to k + q_n; below, the roles of the endpoints swap.
    points_right = ana.verdicts[n] is Comparison.ABOVE
    m = q_low + q_high
    args = map_like.kernel_args()
    pts = _kernels.orbit_positions(*args, 0.0, m)
    order = np.argsort(pts, kind="stable")
    sorted_pts = pts[order]
    lengths = np.diff(np.append(sorted_pts, sorted_pts[0] + 1.0))
    levels = np.empty(m, dtype=np.int64)
    indices = np.empty(m, dtype=np.int64)
    for t in range(m):
        u = int(order[t])
        v = int(order[(t + 1) % m])
        if points_right:
            long_ok = v - u == q_low and u < q_high
            short_ok = u - v == q_high and v < q_low
            long_idx, short_idx = u, v
        else:
            long_ok = u - v == q_low and v < q_high
            short_ok = v - u == q_high and u < q_low
            long_idx, short_idx = v, u
        if long_ok:
            levels[t], indices[t] = n, long_idx
        elif short_ok:
            levels[t], indices[t] = n + 1, short_idx
        else:
            raise SolverError("partition combinatorics failed; orbit "
                              "accuracy fault")
    n_long = int((levels == n).sum())
    n_short = int((levels == n + 1).sum())
    if n_long != q_high or n_short != q_low:
        raise SolverError("partition interval counts do not match the "
                          "convergent denominators")
    total = float(lengths.sum())
    if abs(total - 1.0) > 1e-9:
        raise SolverError(f"partition lengths sum to {total}, not 1")
    if lengths.min() <= 0:
        raise SolverError("degenerate partition interval")
    return DynamicalPartition(level=n, q_low=q_low, q_high=q_high,
                              lefts=sorted_pts, lengths=lengths,
                              interval_levels=levels,
                              interval_indices=indices)


def real_bounds_ratio(partition: DynamicalPartition) -> float:
    """Largest length ratio between adjacent partition intervals."""
    return partition.adjacent_ratio_max()


def max_return_derivative(map_like, n: int, grid: int = 4096,
                          budget: int = 2_000_000) -> float:
    """max over x of (f^{q_n})'(x) on a grid; rigid rotations give 1."""
    ana = analyze_rotation(map_like, tol=0.0, budget=budget, min_records=n + 1)
    if len(ana.ladder) < n + 1:
        raise SolverError(f"convergent ladder too shallow for level {n}")
    q = ana.ladder[n][1]
    x = (np.arange(grid) + 0.5) / grid
    prod = np.ones(grid)
    for _ in range(q):
        prod *= map_like.deriv(x)
        x = (x + map_like.displacement(x)) % 1.0
    return float(prod.max())
