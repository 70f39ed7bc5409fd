"""Map evaluation, inverses, classification, and monotone completions."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from automeasure.circlemap import (MAX_COMPLETED_FOLD, NU_CRITICAL, TWO_PI,
                                   AnalyticCircleMap, MapClass,
                                   NotHomeomorphismError, arnold_map,
                                   circle_distance, frac,
                                   monotone_completion)

STOCK_HOMEOS = [
    AnalyticCircleMap(offset=0.618033988749895),
    arnold_map(0.3, 0.1),
    arnold_map(0.618033988749895, 0.5 * NU_CRITICAL),
    AnalyticCircleMap(offset=0.37, sin_coeffs=(0.04, 0.01),
                      cos_coeffs=(0.02, -0.01)),
    arnold_map(0.606661063470256, NU_CRITICAL),
]


@st.composite
def homeo_maps(draw):
    offset = draw(st.floats(0.0, 1.0, exclude_max=True,
                            allow_nan=False, allow_infinity=False))
    degree = draw(st.integers(0, 3))
    coeff = st.floats(-0.01, 0.01, allow_nan=False)
    sin = tuple(draw(coeff) for _ in range(degree))
    cos = tuple(draw(coeff) for _ in range(degree))
    return AnalyticCircleMap(offset=offset, sin_coeffs=sin, cos_coeffs=cos)


unit_points = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)


@given(homeo_maps(), unit_points)
def test_lift_equivariance(fmap, x):
    assert abs(fmap.lift(x + 1.0) - fmap.lift(x) - 1.0) <= 1e-12


@given(homeo_maps(), unit_points)
def test_inverse_round_trip(fmap, x):
    y = frac(fmap.lift(x))
    assert circle_distance(fmap.inverse(y), x) <= 1e-10


@given(homeo_maps(), unit_points)
def test_derivative_matches_finite_differences(fmap, x):
    h = 1e-5
    fd = (fmap.lift(x + h) - fmap.lift(x - h)) / (2.0 * h)
    d = fmap.deriv(x)
    assert abs(fd - d) <= 1e-6 * max(1.0, abs(d))


@given(homeo_maps(), unit_points, st.floats(1e-6, 0.999))
def test_lift_monotone(fmap, x, t):
    y = x + t * (1.0 - 1e-9)
    assert fmap.lift(x) <= fmap.lift(y) <= fmap.lift(x + 1.0)


@pytest.mark.parametrize("fmap", STOCK_HOMEOS)
def test_stock_maps_are_homeomorphisms(fmap):
    fmap.require_homeomorphism()
    xs = np.linspace(0.0, 1.0, 257)
    lifts = fmap.lift(xs)
    assert np.all(np.diff(lifts) >= -1e-12)


def test_inverse_array_matches_scalar(mixed_diffeo):
    ys = np.linspace(0.0, 1.0, 64, endpoint=False)
    arr = mixed_diffeo.inverse_array(ys)
    for y, xi in zip(ys, arr):
        assert circle_distance(mixed_diffeo.inverse(float(y)), xi) <= 1e-12


def test_classification():
    assert arnold_map(0.3, 0.1).classify() is MapClass.DIFFEOMORPHISM
    crit = arnold_map(0.6, NU_CRITICAL)
    assert crit.classify() is MapClass.MULTICRITICAL
    folded = arnold_map(0.6, 1.1 * NU_CRITICAL)
    assert folded.classify() is MapClass.NOT_HOMEOMORPHISM
    with pytest.raises(NotHomeomorphismError):
        folded.require_homeomorphism()


def test_critical_point_location_and_order():
    crit = arnold_map(0.4, NU_CRITICAL)
    (cp,) = crit.critical_points()
    # derivative 1 + cos(2 pi x) vanishes only at x = 1/2, to order 3
    assert abs(cp.x - 0.5) <= 1e-9
    assert cp.order == 3
    assert abs(crit.deriv(cp.x)) <= 1e-12


def test_min_slope_of_standard_family():
    for nu in (0.0, 0.05, NU_CRITICAL):
        fmap = arnold_map(0.2, nu)
        assert abs(fmap.min_slope - (1.0 - TWO_PI * nu)) <= 1e-9


def test_displacement_periodic(mixed_diffeo):
    xs = np.linspace(0.0, 1.0, 17)
    d1 = mixed_diffeo.displacement(xs)
    d2 = mixed_diffeo.displacement(xs + 3.0)
    assert np.allclose(d1, d2, atol=1e-12)


def test_iterate_matches_repeated_application(mixed_diffeo):
    x = 0.123
    manual = x
    for _ in range(7):
        manual = frac(manual + mixed_diffeo.displacement(manual))
    assert circle_distance(mixed_diffeo.iterate(x, 7), manual) <= 1e-12


def test_serialization_round_trip(mixed_diffeo):
    again = AnalyticCircleMap.from_dict(mixed_diffeo.to_dict())
    assert again == mixed_diffeo


def test_frac_scalar_and_array():
    assert frac(1.25) == 0.25
    assert frac(-0.25) == 0.75
    out = frac(np.array([0.5, 1.5, -0.5]))
    assert np.allclose(out, [0.5, 0.5, 0.5])


def test_circle_distance_basic():
    assert circle_distance(0.1, 0.9) == pytest.approx(0.2)
    assert circle_distance(0.25, 0.25) == 0.0
    assert circle_distance(0.0, 0.5) == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# monotone completions of folded lifts


def _folded_map():
    return arnold_map(0.6, 1.05 * NU_CRITICAL)


@pytest.mark.parametrize("side", [+1, -1])
def test_completion_is_monotone_and_brackets_lift(side):
    folded = _folded_map()
    comp = monotone_completion(folded, side)
    comp.require_homeomorphism()
    xs = np.linspace(0.0, 1.0, 2049)
    lifts = comp.lift(xs)
    assert np.all(np.diff(lifts) >= -1e-12)
    raw = folded.lift(xs)
    if side > 0:
        assert np.all(lifts >= raw - 1e-12)
    else:
        assert np.all(lifts <= raw + 1e-12)
    assert abs(comp.lift(2.0 + 0.3) - comp.lift(0.3) - 2.0) <= 1e-12


def test_completion_derivative_nonnegative():
    comp = monotone_completion(_folded_map(), +1)
    xs = np.linspace(0.0, 1.0, 4097)
    assert np.min(comp.deriv(xs)) >= 0.0


def test_completion_rejects_deep_folds():
    # fold depth beyond the supported window must be refused, not hidden
    deep = arnold_map(0.3, 3.0)
    with pytest.raises(NotHomeomorphismError):
        monotone_completion(deep, +1)
    assert MAX_COMPLETED_FOLD < 1.0


def test_completion_of_homeomorphism_is_identity_like():
    fmap = arnold_map(0.3, 0.08)
    comp = monotone_completion(fmap, +1)
    xs = np.linspace(0.0, 1.0, 513)
    assert np.allclose(comp.lift(xs), fmap.lift(xs), atol=1e-12)
