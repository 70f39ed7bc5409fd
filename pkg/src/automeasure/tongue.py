"""Irrational tongue tracing in monotone circle-map families.

A tongue is the parameter curve along which a one-parameter family of
circle maps keeps a fixed irrational rotation number.  This module
locates tongue points by certified bisection (exact rational
comparisons only — no floating rotation-number estimates inside the
loop), differentiates the tongue through the solved (-1)-measure, and
cross-validates everything against finite differences, including
one-sidedly at the boundary where the family leaves the
diffeomorphism class.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circlemap import (AnalyticCircleMap, NotHomeomorphismError, SolverError,
                        TWO_PI, monotone_completion)
from .measure import GridMeasure, integrate_pullback, solve_s_measure
from .rotation import (Comparison, ContinuedFractionExpansion,
                       analyze_rotation, compare_certified)

__all__ = [
    "MonotoneFamily", "TonguePoint", "TrigFunction", "TangentReport",
    "solve_tongue_point", "tongue_derivative", "fd_derivative",
    "trace_tongue", "tangent_functional_check",
]


@dataclass(frozen=True)
class TrigFunction:
    """Trigonometric polynomial c0 + sum_k s_k sin 2pi k x + c_k cos 2pi k x.

    Used both as a plain callable (for integration) and as a
    perturbation direction whose multiples can be absorbed into the
    coefficients of an AnalyticCircleMap.
    """

    const: float = 0.0
    sin_coeffs: tuple[float, ...] = ()
    cos_coeffs: tuple[float, ...] = ()

    def __call__(self, x):
        xx = np.asarray(x, dtype=float)
        acc = np.full_like(xx, float(self.const))
        for k, c in enumerate(self.sin_coeffs):
            acc += c * np.sin(TWO_PI * (k + 1) * xx)
        for k, c in enumerate(self.cos_coeffs):
            acc += c * np.cos(TWO_PI * (k + 1) * xx)
        return float(acc) if acc.ndim == 0 else acc

    def scaled_into(self, base: AnalyticCircleMap, t: float) -> AnalyticCircleMap:
        """The map whose lift is lift(base) + t * self."""
        deg = max(base.degree, len(self.sin_coeffs), len(self.cos_coeffs))

        def mix(coeffs, extra):
            out = [0.0] * deg
            for k, c in enumerate(coeffs):
                out[k] += c
            for k, c in enumerate(extra):
                out[k] += t * c
            return tuple(out)

        return AnalyticCircleMap(
            offset=base.offset + t * self.const,
            sin_coeffs=mix(base.sin_coeffs, self.sin_coeffs),
            cos_coeffs=mix(base.cos_coeffs, self.cos_coeffs))


@dataclass(frozen=True)
class MonotoneFamily:
    """Two-parameter family x + a + nu * (trig profile)(x).

    The a-direction is always the rigid shift, so dF/da = 1 > 0 holds
    structurally and at nu = 0 every member is the rotation by a.  The
    nu-direction scales a fixed trigonometric profile.
    """

    sin_profile: tuple[float, ...] = ()
    cos_profile: tuple[float, ...] = ()
    name: str = "family"

    def __post_init__(self):
        object.__setattr__(self, "sin_profile",
                           tuple(float(c) for c in self.sin_profile))
        object.__setattr__(self, "cos_profile",
                           tuple(float(c) for c in self.cos_profile))
        if not any(self.sin_profile) and not any(self.cos_profile):
            raise ValueError("family profile must be a nonzero trig "
                             "polynomial")

    @classmethod
    def arnold(cls) -> "MonotoneFamily":
        return cls(sin_profile=(1.0,), name="arnold")

    def map(self, a: float, nu: float) -> AnalyticCircleMap:
        return AnalyticCircleMap(
            offset=float(a),
            sin_coeffs=tuple(nu * c for c in self.sin_profile),
            cos_coeffs=tuple(nu * c for c in self.cos_profile))

    def d_a(self, x):
        """Partial of the lift in the a-direction: identically 1."""
        xx = np.asarray(x, dtype=float)
        out = np.ones_like(xx)
        return float(out) if out.ndim == 0 else out

    def d_nu(self, x):
        """Partial of the lift in the nu-direction: the profile itself."""
        return TrigFunction(0.0, self.sin_profile, self.cos_profile)(x)

    @property
    def nu_max(self) -> float:
        """Largest nu keeping the family inside monotone maps."""
        unit = self.map(0.0, 1.0)
        dip = unit.min_slope - 1.0
        return math.inf if dip >= 0.0 else -1.0 / dip

    def check_nu(self, nu: float):
        if not 0.0 <= nu <= self.nu_max * (1.0 + 1e-12):
            raise NotHomeomorphismError(
                f"nu={nu!r} leaves the homeomorphism range "
                f"[0, {self.nu_max!r}] of family '{self.name}'")


@dataclass(frozen=True)
class TonguePoint:
    """A solved point of an irrational tongue with its diagnostics."""

    nu: float
    a: float
    alpha: ContinuedFractionExpansion
    derivative: float
    bisect_width: float
    residual: float
    kr_gap: float
    iterations: int
    error: str | None = None


def _side_vs_alpha(map_like, alpha: ContinuedFractionExpansion,
                   convergents) -> int:
    """Certified sign of rho(map) - alpha via the convergent ladder.

    Even-index convergents sit below alpha and odd-index ones above, so
    a single certified comparison against the right convergent decides
    the side.  Raises SolverError when the ladder is exhausted, which
    means rho is indistinguishable from alpha at the ladder's depth.
    """
    for n, (p, q) in enumerate(convergents):
        verdict = compare_certified(map_like, p, q)
        below_alpha = (n % 2 == 0)
        if verdict is Comparison.EQUAL:
            return -1 if below_alpha else 1
        if below_alpha and verdict is Comparison.BELOW:
            return -1
        if not below_alpha and verdict is Comparison.ABOVE:
            return 1
    raise SolverError(
        "convergent ladder exhausted before the rotation number "
        "separated from the target")


def solve_tongue_point(family: MonotoneFamily,
                       alpha: ContinuedFractionExpansion, nu: float,
                       tol_a: float = 1e-12) -> float:
    """Parameter a with rho(f_{a,nu}) = alpha, to bracket width tol_a.

    Bisection on a in [0, 1]; the side of each midpoint is decided by
    certified rational comparisons against the convergents of alpha,
    never by a floating rotation-number estimate.  Monotonicity of rho
    in a (dF/da = 1) makes the bracket sound.
    """
    if alpha.finite and alpha.ell < 8:
        raise ValueError("target rotation number must be irrational "
                         "(given as a deep continued-fraction expansion)")
    if tol_a <= 0.0:
        raise ValueError("tol_a must be positive")
    family.check_nu(nu)
    convergents = alpha.convergents()
    lo, hi = 0.0, 1.0
    # rho(f_{0,nu}) = 0 < alpha < 1 = rho(f_{1,nu}) for the in-range
    # family, so [0, 1] is always a valid starting bracket.
    while hi - lo > tol_a:
        mid = 0.5 * (lo + hi)
        if _side_vs_alpha(family.map(mid, nu), alpha, convergents) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def tongue_derivative(family: MonotoneFamily,
                      alpha: ContinuedFractionExpansion, nu: float,
                      mu: GridMeasure, a: float | None = None,
                      tol_a: float = 1e-12) -> float:
    """da/dnu along the tongue from the solved (-1)-measure.

    Implements the ratio -(integral of dF/dnu at f^{-1}) /
    (integral of dF/da at f^{-1}) against mu, which for this family
    has denominator exactly the total mass 1.
    """
    if a is None:
        a = solve_tongue_point(family, alpha, nu, tol_a)
    fmap = family.map(a, nu)
    num = integrate_pullback(mu, fmap, family.d_nu)
    den = integrate_pullback(mu, fmap, family.d_a)
    if abs(den) < 1e-6:
        raise SolverError("tongue transversality failure: the "
                          "a-direction pairing degenerated")
    return -num / den


def fd_derivative(family: MonotoneFamily,
                  alpha: ContinuedFractionExpansion, nu: float, h: float,
                  tol_a: float = 1e-12) -> float:
    """Finite-difference oracle for da/dnu.

    Central difference in the interior; second-order one-sided
    three-point stencils at the ends of the homeomorphism range, where
    only one side of nu is admissible.
    """
    if h <= 0.0:
        raise ValueError("stencil width h must be positive")
    family.check_nu(nu)
    nu_hi = family.nu_max

    def a_of(nu_k: float) -> float:
        return solve_tongue_point(family, alpha, nu_k, tol_a)

    if nu + h <= nu_hi:
        if nu - h >= 0.0:
            return (a_of(nu + h) - a_of(nu - h)) / (2.0 * h)
        return (-3.0 * a_of(nu) + 4.0 * a_of(nu + h) - a_of(nu + 2.0 * h)) \
            / (2.0 * h)
    if nu - 2.0 * h < 0.0:
        raise NotHomeomorphismError(
            f"stencil of width {h!r} does not fit inside the "
            f"homeomorphism range at nu={nu!r}")
    return (3.0 * a_of(nu) - 4.0 * a_of(nu - h) + a_of(nu - 2.0 * h)) \
        / (2.0 * h)


def _trace_point(args) -> TonguePoint:
    family, alpha, nu, tol_a, N, tol_kr = args
    try:
        a = solve_tongue_point(family, alpha, nu, tol_a)
        fmap = family.map(a, nu)
        res = solve_s_measure(fmap, -1.0, N=N, tol_kr=tol_kr)
        deriv = tongue_derivative(family, alpha, nu, res.measure, a=a)
        return TonguePoint(nu=nu, a=a, alpha=alpha, derivative=deriv,
                           bisect_width=tol_a, residual=res.residual,
                           kr_gap=res.kr_gap, iterations=res.iterations)
    except Exception as exc:  # noqa: BLE001 - per-point failures reported
        return TonguePoint(nu=nu, a=math.nan, alpha=alpha,
                           derivative=math.nan, bisect_width=math.nan,
                           residual=math.nan, kr_gap=math.nan, iterations=0,
                           error=f"{type(exc).__name__}: {exc}")


def trace_tongue(family: MonotoneFamily,
                 alpha: ContinuedFractionExpansion, nu_list,
                 tol_a: float = 1e-12, N: int = 2 ** 14,
                 tol_kr: float = 1e-9, workers: int | None = None
                 ) -> list[TonguePoint]:
    """Solve one TonguePoint per nu, in input order.

    Points are independent work units; with workers > 1 they are
    dispatched to a process pool.  A failed point carries its error
    message instead of aborting the trace.
    """
    jobs = [(family, alpha, float(nu), tol_a, N, tol_kr) for nu in nu_list]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_trace_point, jobs))
    return [_trace_point(job) for job in jobs]


# ---------------------------------------------------------------------------
# tangent-space check


@dataclass(frozen=True)
class TangentReport:
    """Finite-difference examination of one perturbation direction."""

    c: float                       # pairing of v with the pulled-back measure
    rho_base: float
    t_values: tuple[float, ...]
    rho_values: tuple[float, ...]  # completed-midpoint rho at each t
    rho_uncertainty: float         # widest completion bracket encountered
    decay_exponent: float          # fitted slope of log|drho| vs log|t|
    fd_slope: float                # Richardson slope of rho along v
    drho_da: float                 # Richardson slope of rho along constant 1
    ratio: float                   # fd_slope / (c * drho_da); nan when c ~ 0
    deltas: tuple[float, ...] = field(default=(), repr=False)


_RHO_TOL = 1e-11
_RHO_FLOOR = 1e-11


def _rho_completed(fmap: AnalyticCircleMap, tol: float = _RHO_TOL):
    """Rotation number, through monotone hulls when the lift folds.

    Returns (midpoint value, bracket width): zero width for genuine
    homeomorphisms, and the upper/lower hull spread otherwise.
    """
    try:
        fmap.require_homeomorphism()
    except NotHomeomorphismError:
        up = analyze_rotation(monotone_completion(fmap, +1), tol=tol)
        dn = analyze_rotation(monotone_completion(fmap, -1), tol=tol)
        width = abs(up.rho - dn.rho)
        return 0.5 * (up.rho + dn.rho), width
    ana = analyze_rotation(fmap, tol=tol)
    return ana.rho, ana.gap


def _richardson_slope(rho_of, t: float):
    """Two-sided slope with one Richardson step (t and t/2 stencils)."""
    s1 = (rho_of(t) - rho_of(-t)) / (2.0 * t)
    s2 = (rho_of(0.5 * t) - rho_of(-0.5 * t)) / t
    return (4.0 * s2 - s1) / 3.0


def tangent_functional_check(map_like: AnalyticCircleMap, mu: GridMeasure,
                             v: TrigFunction, t_list) -> TangentReport:
    """Probe whether v behaves as a tangent direction at map_like.

    Computes the pairing c of v with the pulled-back (-1)-measure, the
    certified rotation numbers of the maps perturbed by t*v (monotone
    hulls take over when a perturbation folds the lift), the fitted
    decay exponent of |rho(f + t v) - rho(f)|, and the ratio of the
    finite-difference slope of rho along v to c times the slope along
    the constant direction.  Directions with c = 0 must show
    superlinear decay; directions with c != 0 must show ratio 1.
    """
    t_values = tuple(float(t) for t in t_list)
    if not t_values or any(t == 0.0 for t in t_values):
        raise ValueError("t_list must be nonempty and nonzero")
    c = integrate_pullback(mu, map_like, v)
    base = analyze_rotation(map_like, tol=_RHO_TOL)
    rho_base = base.rho

    def rho_at(t: float):
        return _rho_completed(v.scaled_into(map_like, t))

    rho_vals = []
    widths = [base.gap]
    for t in t_values:
        r, wd = rho_at(t)
        rho_vals.append(r)
        widths.append(wd)
    deltas = tuple(abs(r - rho_base) for r in rho_vals)
    # Deltas below the certification floor are clamped, which can only
    # bias the fitted exponent downward (toward failing a superlinear
    # assertion, never toward passing it).
    logs = np.log([max(d, _RHO_FLOOR) for d in deltas])
    ts = np.log([abs(t) for t in t_values])
    exponent = float(np.polyfit(ts, logs, 1)[0]) if len(t_values) > 1 \
        else math.nan

    t_small = min(abs(t) for t in t_values)
    fd_slope = _richardson_slope(lambda t: rho_at(t)[0], t_small)
    constant = TrigFunction(const=1.0)
    drho_da = _richardson_slope(
        lambda t: _rho_completed(constant.scaled_into(map_like, t))[0],
        t_small)
    ratio = fd_slope / (c * drho_da) if abs(c * drho_da) > 1e-14 else math.nan

    return TangentReport(c=c, rho_base=rho_base, t_values=t_values,
                         rho_values=tuple(rho_vals),
                         rho_uncertainty=float(max(widths)),
                         decay_exponent=exponent, fd_slope=fd_slope,
                         drho_da=drho_da, ratio=ratio, deltas=deltas)
