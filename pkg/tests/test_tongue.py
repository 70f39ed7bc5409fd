"""Tongue boundaries: certified bisection, derivatives, tangent probes."""

import math

import numpy as np
import pytest

from automeasure.circlemap import (NU_CRITICAL, AnalyticCircleMap,
                                   NotHomeomorphismError)
from automeasure.measure import integrate_pullback, lebesgue, solve_s_measure
from automeasure.rotation import (GOLDEN_MEAN, Comparison,
                                  ContinuedFractionExpansion,
                                  compare_certified)
from automeasure.tongue import (MonotoneFamily, TrigFunction, fd_derivative,
                                solve_tongue_point, tangent_functional_check,
                                tongue_derivative, trace_tongue)

GOLDEN = ContinuedFractionExpansion.golden(40)
ONE_MINUS_GOLDEN = ContinuedFractionExpansion((0, 2) + (1,) * 38)
ARNOLD = MonotoneFamily.arnold()
TOL_A = 1e-9


# ---------------------------------------------------------------------------
# TrigFunction and MonotoneFamily


def test_trig_function_values():
    f = TrigFunction(const=0.5, sin_coeffs=(1.0,), cos_coeffs=(0.0, 2.0))
    x = 0.25
    expected = 0.5 + math.sin(2 * math.pi * x) + 2 * math.cos(4 * math.pi * x)
    assert f(x) == pytest.approx(expected, abs=1e-12)
    arr = f(np.array([0.0, 0.25]))
    assert arr.shape == (2,)


def test_scaled_into_mixes_coefficients():
    base = AnalyticCircleMap(offset=0.3, sin_coeffs=(0.05,))
    v = TrigFunction(const=1.0, sin_coeffs=(0.0, 2.0))
    out = v.scaled_into(base, 0.01)
    assert out.offset == pytest.approx(0.31)
    assert out.sin_coeffs == pytest.approx((0.05, 0.02))
    xs = np.linspace(0.0, 1.0, 33)
    assert np.allclose(out.lift(xs), base.lift(xs) + 0.01 * v(xs),
                       atol=1e-12)


def test_family_basics():
    assert ARNOLD.nu_max == pytest.approx(NU_CRITICAL, rel=1e-12)
    assert ARNOLD.d_a(0.37) == 1.0
    assert ARNOLD.d_nu(0.25) == pytest.approx(1.0)
    fmap = ARNOLD.map(0.3, 0.05)
    assert fmap.offset == 0.3 and fmap.sin_coeffs == (0.05,)
    with pytest.raises(NotHomeomorphismError):
        ARNOLD.check_nu(1.5 * NU_CRITICAL)
    with pytest.raises(ValueError):
        MonotoneFamily(sin_profile=(), cos_profile=())


def test_cos_family_range():
    fam = MonotoneFamily(sin_profile=(), cos_profile=(1.0,), name="cosine")
    assert fam.nu_max == pytest.approx(NU_CRITICAL, rel=1e-12)
    fam.check_nu(0.5 * NU_CRITICAL)


# ---------------------------------------------------------------------------
# certified tongue points


def test_tongue_point_validation():
    with pytest.raises(ValueError):
        solve_tongue_point(ARNOLD, GOLDEN, 0.1, tol_a=0.0)
    with pytest.raises(ValueError):
        shallow = ContinuedFractionExpansion((0, 2, 3), finite=True)
        solve_tongue_point(ARNOLD, shallow, 0.1)
    with pytest.raises(NotHomeomorphismError):
        solve_tongue_point(ARNOLD, GOLDEN, 2.0 * NU_CRITICAL)


def test_tongue_point_at_zero_coupling_is_alpha():
    a = solve_tongue_point(ARNOLD, GOLDEN, 0.0, tol_a=1e-8)
    assert abs(a - GOLDEN_MEAN) <= 2e-8


def test_tongue_point_certificate():
    nu = 0.3 * NU_CRITICAL
    a = solve_tongue_point(ARNOLD, GOLDEN, nu, tol_a=TOL_A)
    fmap = ARNOLD.map(a, nu)
    # the returned parameter pins rho between consecutive convergents
    assert compare_certified(fmap, 8, 13) is Comparison.ABOVE
    assert compare_certified(fmap, 13, 21) is Comparison.BELOW


def test_tongue_symmetry_under_reflection():
    # conjugating by x -> -x maps the alpha tongue to the (1 - alpha) one
    nu = 0.5 * NU_CRITICAL
    a = solve_tongue_point(ARNOLD, GOLDEN, nu, tol_a=TOL_A)
    a_mirror = solve_tongue_point(ARNOLD, ONE_MINUS_GOLDEN, nu, tol_a=TOL_A)
    assert abs(a_mirror - (1.0 - a)) <= 2.5 * TOL_A


# ---------------------------------------------------------------------------
# derivatives along the tongue


@pytest.fixture(scope="module")
def mid_tongue():
    nu = 0.5 * NU_CRITICAL
    a = solve_tongue_point(ARNOLD, GOLDEN, nu, tol_a=TOL_A)
    mu = solve_s_measure(ARNOLD.map(a, nu), -1.0, N=2 ** 12,
                         tol_kr=1e-9).measure
    return nu, a, mu


def test_derivative_denominator_is_total_mass(mid_tongue):
    nu, a, mu = mid_tongue
    den = integrate_pullback(mu, ARNOLD.map(a, nu), ARNOLD.d_a)
    assert abs(den - 1.0) <= 1e-12


def test_derivative_matches_fd_with_expected_order(mid_tongue):
    nu, a, mu = mid_tongue
    deriv = tongue_derivative(ARNOLD, GOLDEN, nu, mu, a=a)
    hs = (1e-2, 5e-3, 2.5e-3)
    diffs = [abs(deriv - fd_derivative(ARNOLD, GOLDEN, nu, h, tol_a=TOL_A))
             for h in hs]
    order = np.polyfit(np.log(hs), np.log(diffs), 1)[0]
    assert 1.5 <= order <= 2.6
    scale = 1.5 * diffs[0] / hs[0] ** 2
    for h, d in zip(hs, diffs):
        assert d <= scale * h * h + TOL_A / h


def test_fd_validation():
    with pytest.raises(ValueError):
        fd_derivative(ARNOLD, GOLDEN, 0.1, h=0.0)
    with pytest.raises(NotHomeomorphismError):
        # stencil cannot fit: nu_max needs nu - 2h >= 0
        fd_derivative(ARNOLD, GOLDEN, NU_CRITICAL, h=0.6 * NU_CRITICAL)


def test_trace_tongue_records_failures():
    points = trace_tongue(ARNOLD, GOLDEN, [0.0, 5.0 * NU_CRITICAL],
                          tol_a=1e-8, N=256, tol_kr=1e-8)
    good, bad = points
    assert good.error is None
    assert abs(good.a - GOLDEN_MEAN) <= 1e-7
    assert good.derivative == pytest.approx(0.0, abs=1e-6)
    assert bad.error is not None and math.isnan(bad.a)


def test_trace_tongue_parallel_matches_serial():
    nus = [0.0, 0.2 * NU_CRITICAL]
    serial = trace_tongue(ARNOLD, GOLDEN, nus, tol_a=1e-8, N=256,
                          tol_kr=1e-8)
    parallel = trace_tongue(ARNOLD, GOLDEN, nus, tol_a=1e-8, N=256,
                            tol_kr=1e-8, workers=2)
    for p, q in zip(serial, parallel):
        assert p.a == q.a and p.nu == q.nu
        assert p.derivative == q.derivative


# ---------------------------------------------------------------------------
# tangent probes


def test_tangent_check_on_rotation_constant_direction(golden_rotation):
    mu = lebesgue(256)
    rep = tangent_functional_check(golden_rotation, mu,
                                   TrigFunction(const=1.0),
                                   (1e-3, 3e-4))
    # rho(x + a + t) = rho + t exactly: unit slope, unit pairing
    assert rep.c == pytest.approx(1.0, abs=1e-12)
    assert rep.fd_slope == pytest.approx(1.0, abs=1e-6)
    assert rep.drho_da == pytest.approx(1.0, abs=1e-6)
    assert rep.ratio == pytest.approx(1.0, abs=1e-5)
    assert 0.8 <= rep.decay_exponent <= 1.2


def test_tangent_check_validation(golden_rotation):
    with pytest.raises(ValueError):
        tangent_functional_check(golden_rotation, lebesgue(64),
                                 TrigFunction(const=1.0), ())
    with pytest.raises(ValueError):
        tangent_functional_check(golden_rotation, lebesgue(64),
                                 TrigFunction(const=1.0), (0.0,))
