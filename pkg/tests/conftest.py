"""Shared fixtures: stock maps and a deterministic hypothesis profile."""

import pytest
from hypothesis import HealthCheck, settings

from automeasure.circlemap import (NU_CRITICAL, AnalyticCircleMap,
                                   arnold_map)
from automeasure.rotation import GOLDEN_MEAN

settings.register_profile(
    "research",
    deadline=None,
    derandomize=True,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("research")

# Golden-tongue parameter values a(nu) at nu = 0.9 nu_c and nu = nu_c,
# solved by certified bisection to bracket width 1e-12.  Hard-coded so
# unit tests never pay for a tongue solve; the acceptance suite
# recomputes them from scratch.
A_DIFFEO = 0.608393521633388
A_CRITICAL = 0.606661063470256


@pytest.fixture(scope="session")
def golden_rotation() -> AnalyticCircleMap:
    return AnalyticCircleMap(offset=GOLDEN_MEAN)


@pytest.fixture(scope="session")
def diffeo_map() -> AnalyticCircleMap:
    return arnold_map(A_DIFFEO, 0.9 * NU_CRITICAL)


@pytest.fixture(scope="session")
def critical_map() -> AnalyticCircleMap:
    return arnold_map(A_CRITICAL, NU_CRITICAL)


@pytest.fixture(scope="session")
def mixed_diffeo() -> AnalyticCircleMap:
    return AnalyticCircleMap(offset=0.37, sin_coeffs=(0.04, 0.01),
                             cos_coeffs=(0.02, -0.01))
