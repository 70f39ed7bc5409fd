"""Scalar orbit kernels, JIT-compiled when numba is available.

Every kernel works on the lift F(x) = x + a + sum_k (c_k sin 2pi k x +
d_k cos 2pi k x), optionally overridden on finitely many plateau
intervals (used by monotone completions of slightly folded lifts).
Positions are kept reduced to [0, 1); total displacement is accumulated
with compensated summation so that the lift value after n steps is
recovered as x0 + sum of displacements without O(n) rounding growth.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is an optional accelerator
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap

TWO_PI = 2.0 * math.pi

EMPTY = np.empty(0, dtype=np.float64)


@njit(cache=True)
def displacement_at(a, sin_c, cos_c, plat_lo, plat_hi, plat_val, x):
    """Displacement F(x) - x at a point x in [0, 1)."""
    for i in range(plat_lo.shape[0]):
        if plat_lo[i] <= x < plat_hi[i]:
            return plat_val[i] - x
    acc = a
    for k in range(sin_c.shape[0]):
        w = TWO_PI * (k + 1)
        acc += sin_c[k] * math.sin(w * x) + cos_c[k] * math.cos(w * x)
    return acc


@njit(cache=True)
def displacement_sum(a, sin_c, cos_c, plat_lo, plat_hi, plat_val, x0, n):
    """Total lift displacement after n forward steps from x0.

    Returns (sum, x_end) where sum = F^n(x0) - x0 and x_end = f^n(x0)
    reduced to [0, 1).  The sum uses Kahan compensation.
    """
    x = x0 - math.floor(x0)
    s = 0.0
    comp = 0.0
    for _ in range(n):
        d = displacement_at(a, sin_c, cos_c, plat_lo, plat_hi, plat_val, x)
        y = d - comp
        t = s + y
        comp = (t - s) - y
        s = t
        x = x + d
        x -= math.floor(x)
    return s, x


@njit(cache=True)
def closest_return_scan(a, sin_c, cos_c, plat_lo, plat_hi, plat_val,
                        budget, qq_target, max_records):
    """Scan the orbit of 0 for closest returns, one side at a time.

    A time j improves a side when f^j(0) is nearer to 0 from that side
    (right: fractional part, left: one minus it) than every earlier
    time; such times are exactly the intermediate-convergent times of
    the rotation number, and the last improvement of a same-side run is
    a full convergent denominator.  Runs are therefore collapsed: a
    record is committed only when the opposite side next improves, so
    the returned times are the convergent denominators q_0 < q_1 < ...
    regardless of how the map distorts distances.  Scanning stops when
    the product of the last two committed times reaches qq_target, when
    max_records records are committed, on an exact return (rational
    rotation number), or at the orbit budget.

    Returns (times, disps, dists, used, total_disp) where disps[k] is
    the lift displacement F^times[k](0) and total_disp the displacement
    at the last computed step.
    """
    times = np.zeros(max_records, dtype=np.int64)
    disps = np.zeros(max_records, dtype=np.float64)
    dists = np.zeros(max_records, dtype=np.float64)
    count = 0
    x = 0.0
    s = 0.0
    comp = 0.0
    best_r = 1.0
    best_l = 1.0
    pend_t = 0
    pend_s = 0.0
    pend_d = 0.0
    pend_side = 0
    j = 0
    while j < budget:
        j += 1
        d = displacement_at(a, sin_c, cos_c, plat_lo, plat_hi, plat_val, x)
        y = d - comp
        t = s + y
        comp = (t - s) - y
        s = t
        x = x + d
        x -= math.floor(x)
        fr = x
        fl = 1.0 - x
        improved_r = fr < best_r
        improved_l = fl < best_l
        if not (improved_r or improved_l):
            continue
        if improved_r:
            best_r = fr
        if improved_l:
            best_l = fl
        if improved_r and (not improved_l or fr <= fl):
            side = 1
            dist = fr
        else:
            side = -1
            dist = fl
        if pend_t > 0 and side != pend_side:
            times[count] = pend_t
            disps[count] = pend_s
            dists[count] = pend_d
            count += 1
            if count >= max_records:
                break
            if count >= 2 and (float(times[count - 1]) *
                               float(times[count - 2]) >= qq_target):
                break
        pend_t = j
        pend_s = s
        pend_d = dist
        pend_side = side
        if dist == 0.0:
            if count < max_records:
                times[count] = j
                disps[count] = s
                dists[count] = 0.0
                count += 1
            break
    return times[:count], disps[:count], dists[:count], j, s


@njit(cache=True)
def orbit_positions(a, sin_c, cos_c, plat_lo, plat_hi, plat_val, x0, n):
    """Positions f^j(x0) mod 1 for j = 0..n-1."""
    out = np.empty(n, dtype=np.float64)
    x = x0 - math.floor(x0)
    for j in range(n):
        out[j] = x
        d = displacement_at(a, sin_c, cos_c, plat_lo, plat_hi, plat_val, x)
        x = x + d
        x -= math.floor(x)
    return out


@njit(cache=True)
def orbit_histogram(a, sin_c, cos_c, plat_lo, plat_hi, plat_val, x0, n, nbins):
    """Bin counts of the orbit x0, f(x0), ..., f^(n-1)(x0)."""
    counts = np.zeros(nbins, dtype=np.float64)
    x = x0 - math.floor(x0)
    for _ in range(n):
        idx = int(x * nbins)
        if idx >= nbins:
            idx = nbins - 1
        counts[idx] += 1.0
        d = displacement_at(a, sin_c, cos_c, plat_lo, plat_hi, plat_val, x)
        x = x + d
        x -= math.floor(x)
    return counts


@njit(cache=True)
def derivative_chain_log(a, sin_c, cos_c, x0, n):
    """log (f^n)'(x0) accumulated along the orbit; -inf if a factor is 0."""
    x = x0 - math.floor(x0)
    acc = 0.0
    for _ in range(n):
        der = 1.0
        for k in range(sin_c.shape[0]):
            w = TWO_PI * (k + 1)
            der += w * (sin_c[k] * math.cos(w * x) - cos_c[k] * math.sin(w * x))
        if der <= 0.0:
            return -math.inf
        acc += math.log(der)
        d = a
        for k in range(sin_c.shape[0]):
            w = TWO_PI * (k + 1)
            d += sin_c[k] * math.sin(w * x) + cos_c[k] * math.cos(w * x)
        x = x + d
        x -= math.floor(x)
    return acc
