"""Certified rotation numbers, continued fractions, and partitions."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from automeasure.circlemap import (NU_CRITICAL, AnalyticCircleMap,
                                   SolverError, arnold_map)
from automeasure.rotation import (GOLDEN_MEAN, SILVER_MEAN, Comparison,
                                  ContinuedFractionExpansion,
                                  analyze_rotation, build_partition,
                                  cf_expand, closest_return_times,
                                  compare_certified, compare_to_rational,
                                  convergents, max_return_derivative,
                                  real_bounds_ratio, rotation_number)

FIBONACCI = [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610]


# ---------------------------------------------------------------------------
# continued fractions


def test_golden_expansion_convergents():
    cf = ContinuedFractionExpansion.golden(12)
    conv = cf.convergents()
    assert [q for _, q in conv] == FIBONACCI[:12]
    assert [p for p, _ in conv] == [0] + FIBONACCI[:11]
    lo, hi = cf.bracket()
    assert lo < Fraction(GOLDEN_MEAN).limit_denominator(10 ** 6) < hi


def test_expansion_validation():
    with pytest.raises(ValueError):
        ContinuedFractionExpansion(())
    with pytest.raises(ValueError):
        ContinuedFractionExpansion((0, 0, 1))
    finite = ContinuedFractionExpansion((0, 2, 3), finite=True)
    assert finite.ell == 3
    assert ContinuedFractionExpansion.golden().ell is None


@given(st.integers(0, 50), st.integers(1, 400))
def test_rational_expansion_round_trip(p, q):
    value = Fraction(p, q)
    cf = cf_expand(float(value), depth=64)
    got = Fraction(*cf.convergents()[-1])
    assert abs(got - value) <= Fraction(1, 10 ** 12)


def test_cf_expand_golden_prefix():
    cf = cf_expand(GOLDEN_MEAN, depth=20)
    assert cf.quotients[0] == 0
    assert all(k == 1 for k in cf.quotients[1:15])
    assert convergents(GOLDEN_MEAN, depth=10)[:5] == \
        ContinuedFractionExpansion.golden(10).convergents()[:5]


# ---------------------------------------------------------------------------
# certified comparisons and rotation numbers


def test_compare_to_rational_rotation():
    rot = AnalyticCircleMap(offset=0.37)
    assert compare_to_rational(rot, 1, 3) is Comparison.ABOVE
    assert compare_to_rational(rot, 2, 5) is Comparison.BELOW
    assert compare_to_rational(AnalyticCircleMap(offset=0.4), 2, 5) \
        is Comparison.EQUAL
    assert compare_certified(rot, 1, 3) is Comparison.ABOVE


def test_rotation_number_of_rigid_rotation(golden_rotation):
    ana = rotation_number(golden_rotation, tol=1e-10)
    assert ana.certified and ana.gap <= 1e-10
    assert ana.rho == pytest.approx(GOLDEN_MEAN, abs=1e-10)
    assert all(k == 1 for k in ana.quotients[1:])
    fib = [1, 1]
    while len(fib) < len(ana.ladder):
        fib.append(fib[-1] + fib[-2])
    assert [q for _, q in ana.ladder] == fib[:len(ana.ladder)]


def test_rotation_number_silver():
    ana = rotation_number(AnalyticCircleMap(offset=SILVER_MEAN), tol=1e-10)
    assert ana.certified and ana.gap <= 1e-10
    assert all(k == 2 for k in ana.quotients[1:6])


def test_rational_rotation_detected():
    ana = rotation_number(AnalyticCircleMap(offset=2.0 / 7.0))
    assert ana.rational == Fraction(2, 7)
    assert ana.gap == 0.0 and ana.certified


def test_mode_locked_map_detected():
    # inside the 0/1 tongue: orbit falls onto an attracting fixed point
    ana = rotation_number(arnold_map(0.0, 0.1))
    assert ana.rational == Fraction(0, 1)
    assert ana.rho == 0.0


def test_verdicts_alternate_on_irrational_maps(golden_rotation, diffeo_map):
    for fmap in (golden_rotation, diffeo_map):
        ana = analyze_rotation(fmap, tol=1e-9)
        flips = [v for v in ana.verdicts if v is not Comparison.EQUAL]
        assert all(a is not b for a, b in zip(flips, flips[1:]))
        assert ana.lower < ana.upper


def test_certified_enclosure_brackets_estimate(diffeo_map):
    ana = analyze_rotation(diffeo_map, tol=1e-9)
    assert float(ana.lower) <= ana.rho <= float(ana.upper)
    assert ana.gap <= 1e-9


def test_closest_return_times_match_convergents(golden_rotation,
                                                critical_map):
    for fmap in (golden_rotation, critical_map):
        times = closest_return_times(fmap, 10)
        ana = analyze_rotation(fmap, tol=0.0, min_records=12)
        dedup = []
        for _, q in ana.ladder:
            if not dedup or q != dedup[-1]:
                dedup.append(q)
        assert list(times) == dedup[:len(times)]


# ---------------------------------------------------------------------------
# dynamical partitions


def test_partition_masses_and_counts(golden_rotation):
    for n in range(0, 7):
        part = build_partition(golden_rotation, n)
        assert abs(part.total_length() - 1.0) <= 1e-9
        assert len(part) == part.q_low + part.q_high
    assert part.q_low == FIBONACCI[6] or part.q_low in FIBONACCI


def test_partition_fibonacci_structure(golden_rotation):
    part = build_partition(golden_rotation, 4)
    assert (part.q_low, part.q_high) == (5, 8)
    # three-distance: a rigid golden rotation has two interval lengths,
    # with adjacent ratio the golden ratio itself
    lengths = np.unique(np.round(part.lengths, 12))
    assert len(lengths) == 2
    assert part.adjacent_ratio_max() == pytest.approx(1.0 / GOLDEN_MEAN,
                                                      abs=1e-9)


def test_partition_refinement_nesting(golden_rotation):
    coarse = build_partition(golden_rotation, 3)
    fine = build_partition(golden_rotation, 4)
    coarse_lefts = np.sort(coarse.lefts)
    fine_lefts = np.sort(fine.lefts)
    # every coarse endpoint survives refinement
    for left in coarse_lefts:
        assert np.min(np.abs(fine_lefts - left)) <= 1e-12


def test_partition_needs_irrational_rho():
    with pytest.raises((SolverError, ValueError)):
        build_partition(AnalyticCircleMap(offset=0.25), 3)
    with pytest.raises(ValueError):
        build_partition(AnalyticCircleMap(offset=GOLDEN_MEAN), -1)


def test_real_bounds_no_growth_for_constant_type_rotations():
    for offset in (GOLDEN_MEAN, SILVER_MEAN):
        rot = AnalyticCircleMap(offset=offset)
        ratios = [real_bounds_ratio(build_partition(rot, n))
                  for n in range(3, 15)]
        running = ratios[0]
        for r in ratios[1:]:
            assert r <= 1.2 * running
            running = max(running, r)


def test_return_derivative_of_rotation_is_one(golden_rotation):
    for n in (3, 6, 9):
        assert max_return_derivative(golden_rotation, n) == 1.0


def test_return_derivative_bounded_on_diffeo(diffeo_map):
    vals = [max_return_derivative(diffeo_map, n) for n in range(3, 9)]
    assert max(vals) < 50.0
