"""Analytic circle maps with degree-one trigonometric-polynomial lifts.

A map is stored through its lift F(x) = x + a + sum_k (c_k sin 2pi k x
+ d_k cos 2pi k x).  The toolkit works with orientation-preserving
homeomorphisms of the circle: diffeomorphisms (F' > 0 everywhere) and
multicritical maps, where F' >= 0 vanishes at finitely many points of
odd local order.  The Arnold family x + a + nu sin 2pi x is the main
stock example; at nu = 1/(2 pi) its derivative 1 + cos 2pi x vanishes
doubly at x = 1/2 and the third derivative is 4 pi^2, a cubic critical
point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import minimize_scalar

TWO_PI = 2.0 * math.pi

# Slope tolerance under which a map is still accepted as a (critical)
# homeomorphism; matches the default delta of classify().
HOMEO_SLOPE_TOL = 1e-12


class NotHomeomorphismError(ValueError):
    """The lift is not monotone within tolerance."""


class SolverError(RuntimeError):
    """A numerical subroutine failed to reach its target accuracy."""


class MapClass(enum.Enum):
    DIFFEOMORPHISM = "diffeomorphism"
    MULTICRITICAL = "multicritical"
    NOT_HOMEOMORPHISM = "not_homeomorphism"


def frac(x):
    """Fractional part in [0, 1); works on scalars and arrays."""
    if isinstance(x, np.ndarray):
        return x - np.floor(x)
    return x - math.floor(x)


def circle_distance(x: float, y: float) -> float:
    d = frac(x - y)
    return d if d <= 0.5 else 1.0 - d


@dataclass(frozen=True)
class CriticalPoint:
    """Location and odd local order of a zero of F'."""

    x: float
    order: int
    order_is_lower_bound: bool = False


@dataclass(frozen=True)
class AnalyticCircleMap:
    """Circle map defined by offset and trigonometric coefficients."""

    offset: float
    sin_coeffs: tuple[float, ...] = ()
    cos_coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "sin_coeffs",
                           tuple(float(c) for c in self.sin_coeffs))
        object.__setattr__(self, "cos_coeffs",
                           tuple(float(c) for c in self.cos_coeffs))

    # -- coefficient views -------------------------------------------------

    @cached_property
    def degree(self) -> int:
        return max(len(self.sin_coeffs), len(self.cos_coeffs))

    @cached_property
    def _sc(self) -> np.ndarray:
        out = np.zeros(self.degree)
        out[: len(self.sin_coeffs)] = self.sin_coeffs
        out.flags.writeable = False
        return out

    @cached_property
    def _cc(self) -> np.ndarray:
        out = np.zeros(self.degree)
        out[: len(self.cos_coeffs)] = self.cos_coeffs
        out.flags.writeable = False
        return out

    def kernel_args(self):
        """Arguments consumed by the orbit kernels."""
        from ._kernels import EMPTY

        return (self.offset, self._sc, self._cc, EMPTY, EMPTY, EMPTY)

    @cached_property
    def displacement_bound(self) -> float:
        """Bound on |F(x) - x - a| over the circle."""
        return float(np.sum(np.abs(self._sc)) + np.sum(np.abs(self._cc)))

    # -- evaluation --------------------------------------------------------

    def displacement(self, x):
        """F(x) - x, vectorized."""
        xx = np.asarray(x, dtype=float)
        acc = np.full_like(xx, self.offset)
        for k in range(self.degree):
            w = TWO_PI * (k + 1)
            acc += self._sc[k] * np.sin(w * xx) + self._cc[k] * np.cos(w * xx)
        return float(acc) if acc.ndim == 0 else acc

    def lift(self, x):
        """Lift value F(x), vectorized; satisfies F(x + 1) = F(x) + 1."""
        xx = np.asarray(x, dtype=float)
        out = xx + self.displacement(xx)
        return float(out) if np.ndim(out) == 0 else out

    def __call__(self, x):
        """Circle map value f(x) = F(x) mod 1."""
        out = np.asarray(self.lift(x))
        out = out - np.floor(out)
        return float(out) if out.ndim == 0 else out

    def deriv(self, x, order: int = 1):
        """Derivative of the lift of the given order (1, 2 or 3)."""
        if order not in (1, 2, 3):
            raise ValueError(f"derivative order must be 1, 2 or 3, got {order}")
        return self._deriv_any(x, order)

    def _deriv_any(self, x, order: int):
        # Termwise: d^j/dx^j sin(wx) = w^j sin(wx + j pi/2), same for cos.
        xx = np.asarray(x, dtype=float)
        shift = order * math.pi / 2.0
        acc = np.full_like(xx, 1.0 if order == 1 else 0.0)
        for k in range(self.degree):
            w = TWO_PI * (k + 1)
            theta = w * xx + shift
            acc += (w ** order) * (self._sc[k] * np.sin(theta)
                                   + self._cc[k] * np.cos(theta))
        return float(acc) if acc.ndim == 0 else acc

    # -- monotonicity ------------------------------------------------------

    @cached_property
    def _slope_minimum(self) -> tuple[float, float]:
        """(argmin, min) of F' over [0, 1), grid-scanned and polished."""
        if self.degree == 0:
            return 0.0, 1.0
        n = 4096
        gx = np.arange(n) / n
        gv = self._deriv_any(gx, 1)
        best_x, best_v = 0.0, math.inf
        is_min = (gv <= np.roll(gv, 1)) & (gv <= np.roll(gv, -1))
        cutoff = gv.min() + 1e-3 * (abs(gv.min()) + 1.0)
        for i in np.nonzero(is_min & (gv <= cutoff))[0]:
            lo, hi = gx[i] - 1.5 / n, gx[i] + 1.5 / n
            res = minimize_scalar(lambda t: float(self._deriv_any(t, 1)),
                                  bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-13})
            x_hat = float(res.x)
            # Newton refinement on F'' sharpens the minimizer when the
            # curvature is nondegenerate.
            for _ in range(4):
                d3 = self._deriv_any(x_hat, 3)
                if abs(d3) < 1e-9:
                    break
                step = self._deriv_any(x_hat, 2) / d3
                if abs(step) > 1.0 / n:
                    break
                x_hat -= step
            v_hat = float(self._deriv_any(x_hat, 1))
            if v_hat < best_v:
                best_x, best_v = frac(x_hat), v_hat
        gmin = float(gv.min())
        if gmin < best_v:
            best_x, best_v = float(gx[int(np.argmin(gv))]), gmin
        return best_x, best_v

    @cached_property
    def min_slope(self) -> float:
        return self._slope_minimum[1]

    def classify(self, delta: float = 1e-12) -> MapClass:
        """Diffeomorphism, multicritical map, or not a homeomorphism."""
        m = self.min_slope
        if m > delta:
            return MapClass.DIFFEOMORPHISM
        if m < -delta:
            return MapClass.NOT_HOMEOMORPHISM
        return MapClass.MULTICRITICAL

    def require_homeomorphism(self):
        if self.min_slope < -HOMEO_SLOPE_TOL:
            raise NotHomeomorphismError(
                f"lift is not monotone: min F' = {self.min_slope:.3e}")

    # -- inversion and iteration -------------------------------------------

    def inverse(self, y: float, tol: float = 1e-14) -> float:
        """Unique x in [0, 1) with f(x) = y mod 1.

        Bisection on the monotone lift, bracketed by the displacement
        bound, then safeguarded Newton.  tol controls |f(x) - y mod 1|.
        """
        self.require_homeomorphism()
        lo = y - self.offset - self.displacement_bound
        hi = y - self.offset + self.displacement_bound
        flo = self.lift(lo) - y
        fhi = self.lift(hi) - y
        if flo > 0 or fhi < 0:
            raise SolverError("inverse bracket failed")
        for _ in range(90):
            mid = 0.5 * (lo + hi)
            fm = self.lift(mid) - y
            if abs(fm) <= 0.25 * tol:
                return frac(mid)
            if fm < 0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 4e-17 * max(1.0, abs(y)):
                break
            der = self.deriv(mid)
            if der > 1e-3:
                x_new = mid - fm / der
                if lo < x_new < hi:
                    f_new = self.lift(x_new) - y
                    if abs(f_new) <= 0.25 * tol:
                        return frac(x_new)
                    if f_new < 0:
                        lo = x_new
                    else:
                        hi = x_new
        x = 0.5 * (lo + hi)
        if abs(self.lift(x) - y) > tol:
            raise SolverError(f"inverse did not reach tol={tol}")
        return frac(x)

    def inverse_array(self, y: np.ndarray, tol: float = 1e-14) -> np.ndarray:
        """Vectorized inverse; returns preimages in [0, 1)."""
        self.require_homeomorphism()
        y = np.asarray(y, dtype=float)
        lo = y - self.offset - self.displacement_bound
        hi = y - self.offset + self.displacement_bound
        for _ in range(62):
            mid = 0.5 * (lo + hi)
            below = self.lift(mid) < y
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        x = 0.5 * (lo + hi)
        # Two Newton steps where the slope is safe.
        for _ in range(2):
            der = self._deriv_any(x, 1)
            step = np.where(der > 1e-3, (self.lift(x) - y) / np.maximum(der, 1e-3), 0.0)
            x = np.clip(x - step, lo, hi)
        err = np.abs(self.lift(x) - y)
        if float(err.max()) > tol * 100:
            raise SolverError("vectorized inverse did not converge")
        return x - np.floor(x)

    def iterate(self, x: float, n: int, tol: float = 1e-14) -> float:
        """n-th forward (n >= 0) or backward (n < 0) image on the circle."""
        cur = frac(x)
        if n >= 0:
            for _ in range(n):
                cur = frac(self.lift(cur))
            return cur
        self.require_homeomorphism()
        for _ in range(-n):
            cur = self.inverse(cur, tol=tol)
        return cur

    # -- critical structure --------------------------------------------------

    def critical_points(self, tol: float = 1e-8) -> tuple[CriticalPoint, ...]:
        """Zeros of F' with their odd local orders.

        The order is the smallest j >= 2 with |F^(j)(x_c)| > tol; only
        odd orders can occur for a monotone trig lift, and orders that
        cannot be pinned below 5 are reported as a lower bound.
        """
        if self.min_slope < -tol:
            raise NotHomeomorphismError(
                f"min F' = {self.min_slope:.3e} < -tol; not a homeomorphism")
        if self.degree == 0:
            return ()
        n = 8192
        gx = np.arange(n) / n
        gv = self._deriv_any(gx, 1)
        is_min = (gv <= np.roll(gv, 1)) & (gv <= np.roll(gv, -1))
        candidates = np.nonzero(is_min & (gv < 1e-4))[0]
        found: list[CriticalPoint] = []
        for i in candidates:
            res = minimize_scalar(lambda t: float(self._deriv_any(t, 1)),
                                  bounds=(gx[i] - 1.5 / n, gx[i] + 1.5 / n),
                                  method="bounded", options={"xatol": 1e-14})
            x_hat = float(res.x)
            for _ in range(6):
                d3 = self._deriv_any(x_hat, 3)
                if abs(d3) < 1e-9:
                    break
                step = self._deriv_any(x_hat, 2) / d3
                if abs(step) > 1.0 / n:
                    break
                x_hat -= step
            if float(self._deriv_any(x_hat, 1)) > tol:
                continue
            x_hat = frac(x_hat)
            if any(circle_distance(x_hat, c.x) < 1e-6 for c in found):
                continue
            order = None
            for j in range(2, 6):
                if abs(self._deriv_any(x_hat, j)) > tol:
                    order = j
                    break
            if order is None:
                found.append(CriticalPoint(x_hat, 5, order_is_lower_bound=True))
                continue
            if order % 2 == 0:
                raise SolverError(
                    f"even vanishing order {order} at x = {x_hat:.6f}; "
                    "monotone trig lifts admit only odd critical orders")
            found.append(CriticalPoint(x_hat, order))
        return tuple(sorted(found, key=lambda c: c.x))

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {"offset": self.offset,
                "sin": list(self.sin_coeffs),
                "cos": list(self.cos_coeffs)}

    @classmethod
    def from_dict(cls, data: dict) -> "AnalyticCircleMap":
        return cls(offset=float(data["offset"]),
                   sin_coeffs=tuple(data.get("sin", ())),
                   cos_coeffs=tuple(data.get("cos", ())))


def arnold_map(a: float, nu: float) -> AnalyticCircleMap:
    """Arnold family member with lift x + a + nu sin 2pi x."""
    return AnalyticCircleMap(offset=a, sin_coeffs=(nu,))


NU_CRITICAL = 1.0 / TWO_PI


@dataclass(frozen=True)
class MonotoneCompletion:
    """Monotone hull of a slightly folded lift.

    For lifts whose derivative dips a little below zero the upper
    (resp. lower) completion replaces each fold with the plateau of its
    leading (resp. trailing) value, giving a continuous monotone
    degree-one map whose rotation number bounds the rotation interval
    of the folded map from above (resp. below).  Plateaus are stored as
    (lo, hi, lift value) triples with lo, hi in [0, 1).
    """

    base: AnalyticCircleMap
    plateaus: tuple[tuple[float, float, float], ...]
    side: int  # +1 upper hull, -1 lower hull

    @cached_property
    def _plat(self):
        lo = np.array([p[0] for p in self.plateaus])
        hi = np.array([p[1] for p in self.plateaus])
        val = np.array([p[2] for p in self.plateaus])
        return lo, hi, val

    def kernel_args(self):
        lo, hi, val = self._plat
        return (self.base.offset, self.base._sc, self.base._cc, lo, hi, val)

    def displacement(self, x):
        xx = np.asarray(x, dtype=float)
        out = np.asarray(self.base.displacement(xx)).copy()
        lo, hi, val = self._plat
        for i in range(lo.shape[0]):
            mask = (xx >= lo[i]) & (xx < hi[i])
            out = np.where(mask, val[i] - xx, out)
        return float(out) if out.ndim == 0 else out

    def lift(self, x):
        out = np.asarray(x, dtype=float) + self.displacement(x)
        return float(out) if np.ndim(out) == 0 else out

    def deriv(self, x, order: int = 1):
        xx = np.asarray(x, dtype=float)
        out = np.asarray(self.base.deriv(xx, order), dtype=float).copy()
        lo, hi, val = self._plat
        for i in range(lo.shape[0]):
            mask = (xx >= lo[i]) & (xx < hi[i])
            out = np.where(mask, 0.0, out)
        return float(out) if out.ndim == 0 else out

    def require_homeomorphism(self):
        return None  # monotone by construction


# Folded lifts beyond this slope violation are rejected rather than
# completed; the hull construction is meant for perturbative folds.
MAX_COMPLETED_FOLD = 0.25


def _fold_intervals(fmap: AnalyticCircleMap) -> list[tuple[float, float]]:
    n = 8192
    gx = np.arange(n + 1) / n
    gv = fmap._deriv_any(gx, 1)
    sign = gv < 0
    if not sign.any():
        return []
    folds = []
    i = 0
    # March over sign changes of F'; refine each crossing by bisection.
    while i < n:
        if not sign[i]:
            i += 1
            continue
        j = i
        while j < n and sign[j]:
            j += 1
        lo = _bisect_zero(fmap, gx[i - 1] if i > 0 else gx[i] - 1.0 / n, gx[i])
        hi = _bisect_zero(fmap, gx[j - 1], gx[j] if j <= n - 1 else gx[j])
        folds.append((lo, hi))
        i = j
    return folds


def _bisect_zero(fmap: AnalyticCircleMap, lo: float, hi: float) -> float:
    flo = fmap._deriv_any(lo, 1)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = fmap._deriv_any(mid, 1)
        if (fm < 0) == (flo < 0):
            lo = mid
            flo = fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _lift_level_crossing(fmap: AnalyticCircleMap, target: float,
                         lo: float, hi: float) -> float:
    """Point in (lo, hi) where the increasing branch of F reaches target."""
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if fmap.lift(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def monotone_completion(fmap: AnalyticCircleMap, side: int):
    """Upper (side=+1) or lower (side=-1) monotone hull of the lift.

    Returns fmap unchanged when it is already monotone.  Raises
    NotHomeomorphismError for folds deeper than MAX_COMPLETED_FOLD.
    """
    if fmap.min_slope >= -HOMEO_SLOPE_TOL:
        return fmap
    if fmap.min_slope < -MAX_COMPLETED_FOLD:
        raise NotHomeomorphismError(
            f"fold too deep to complete: min F' = {fmap.min_slope:.3e}")
    plateaus: list[tuple[float, float, float]] = []
    for lo, hi in _fold_intervals(fmap):
        if side > 0:
            val = fmap.lift(lo)
            end = _lift_level_crossing(fmap, val, hi, lo + 1.0)
            span = (lo, end, val)
        else:
            val = fmap.lift(hi)
            start = _lift_level_crossing(fmap, val, hi - 1.0, lo)
            span = (start, hi, val)
        plateaus.append(span)
    normalized: list[tuple[float, float, float]] = []
    for lo, hi, val in plateaus:
        lo_f, hi_f = frac(lo), frac(hi)
        if lo_f < hi_f:
            normalized.append((lo_f, hi_f, val - math.floor(lo)))
        else:
            # Plateau wraps the seam: split it, adjusting the lift value
            # on the wrapped head by the equivariance shift.
            base_shift = math.floor(lo)
            normalized.append((lo_f, 1.0, val - base_shift))
            normalized.append((0.0, hi_f, val - base_shift - 1.0))
    return MonotoneCompletion(base=fmap, plateaus=tuple(normalized), side=side)
