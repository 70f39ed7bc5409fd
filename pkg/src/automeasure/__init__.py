"""Automorphic measures of analytic circle maps and irrational Arnold tongues."""

from .circlemap import (MAX_COMPLETED_FOLD, NU_CRITICAL, TWO_PI,
                        AnalyticCircleMap, CriticalPoint, MapClass,
                        MonotoneCompletion, NotHomeomorphismError,
                        SolverError, arnold_map, circle_distance, frac,
                        monotone_completion)
from .config import ExperimentConfig, config_digest, load_config
from .measure import (GridMeasure, SMeasureResult, TransferOperator, apply,
                      birkhoff_invariant_measure, build_transfer, dirac,
                      integrate_pullback, invariance_residual, kr_distance,
                      lebesgue, max_atom, solve_s_measure)
from .rotation import (GOLDEN_MEAN, SILVER_MEAN, Comparison,
                       ContinuedFractionExpansion, DynamicalPartition,
                       RotationAnalysis, analyze_rotation, build_partition,
                       cf_expand, closest_return_times, compare_certified,
                       compare_to_rational, convergents,
                       max_return_derivative, real_bounds_ratio,
                       rotation_number)
from .tongue import (MonotoneFamily, TangentReport, TonguePoint,
                     TrigFunction, fd_derivative, solve_tongue_point,
                     tangent_functional_check, tongue_derivative,
                     trace_tongue)

__version__ = "0.1.0"

__all__ = [
    "AnalyticCircleMap", "MonotoneCompletion", "CriticalPoint", "MapClass",
    "NotHomeomorphismError", "SolverError", "arnold_map",
    "monotone_completion", "circle_distance", "frac",
    "NU_CRITICAL", "TWO_PI", "MAX_COMPLETED_FOLD",
    "GOLDEN_MEAN", "SILVER_MEAN", "Comparison",
    "ContinuedFractionExpansion", "RotationAnalysis", "DynamicalPartition",
    "analyze_rotation", "rotation_number", "cf_expand", "convergents",
    "compare_to_rational", "compare_certified", "closest_return_times",
    "build_partition", "real_bounds_ratio", "max_return_derivative",
    "GridMeasure", "TransferOperator", "SMeasureResult",
    "lebesgue", "dirac", "max_atom", "kr_distance", "build_transfer",
    "apply", "solve_s_measure", "invariance_residual", "integrate_pullback",
    "birkhoff_invariant_measure",
    "MonotoneFamily", "TrigFunction", "TonguePoint", "TangentReport",
    "solve_tongue_point", "tongue_derivative", "fd_derivative",
    "trace_tongue", "tangent_functional_check",
    "ExperimentConfig", "load_config", "config_digest",
    "__version__",
]
