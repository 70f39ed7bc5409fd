"""Experiment configuration: a single TOML file drives every subcommand.

All numeric defaults live here so an experiment is fully described by
its config file; every output embeds the config digest, making results
traceable to their exact inputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, replace

try:  # Python >= 3.11
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - 3.10 fallback
    import tomli as _toml

from .circlemap import AnalyticCircleMap
from .tongue import MonotoneFamily

__all__ = ["ExperimentConfig", "load_config", "config_digest"]


def _power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment run."""

    # map under study, as the serialized record {offset, sin, cos}:
    # lift x + offset + sum_k sin_k sin 2pi k x + cos_k cos 2pi k x
    offset: float = 0.0
    sin: tuple[float, ...] = ()
    cos: tuple[float, ...] = ()
    # family for tongue work: profile scaled by nu, shifted by a
    family_sin: tuple[float, ...] = (1.0,)
    family_cos: tuple[float, ...] = ()
    # targets and grids
    alpha: tuple[int, ...] = (0,) + (1,) * 39   # continued-fraction quotients
    s_list: tuple[float, ...] = (-1.0,)
    nu_grid: tuple[float, ...] = ()
    N: int = 2 ** 14
    level: int = 4                              # partition depth
    n_orbit: int = 10 ** 6                      # histogram oracle length
    # tolerances
    tol_kr: float = 1e-9
    tol_a: float = 1e-12
    tol_rho: float = 1e-10
    # execution
    out_dir: str = "out"
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sin", tuple(float(c) for c in self.sin))
        object.__setattr__(self, "cos", tuple(float(c) for c in self.cos))
        object.__setattr__(self, "family_sin",
                           tuple(float(c) for c in self.family_sin))
        object.__setattr__(self, "family_cos",
                           tuple(float(c) for c in self.family_cos))
        object.__setattr__(self, "alpha", tuple(int(k) for k in self.alpha))
        object.__setattr__(self, "s_list",
                           tuple(float(s) for s in self.s_list))
        object.__setattr__(self, "nu_grid",
                           tuple(float(v) for v in self.nu_grid))
        for name in ("tol_kr", "tol_a", "tol_rho"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if not _power_of_two(self.N):
            raise ValueError(f"N must be a power of two >= 2, got {self.N}")
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if self.n_orbit < 1:
            raise ValueError("n_orbit must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if any(k < 1 for k in self.alpha[1:]):
            raise ValueError("continued-fraction quotients after the first "
                             "must be >= 1")

    # -- derived objects ----------------------------------------------------

    def map(self) -> AnalyticCircleMap:
        return AnalyticCircleMap(offset=self.offset, sin_coeffs=self.sin,
                                 cos_coeffs=self.cos)

    def family(self) -> MonotoneFamily:
        return MonotoneFamily(sin_profile=self.family_sin,
                              cos_profile=self.family_cos)

    def target_alpha(self):
        from .rotation import ContinuedFractionExpansion

        return ContinuedFractionExpansion(self.alpha, finite=False)

    def digest(self) -> str:
        return config_digest(self)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


def config_digest(config: ExperimentConfig) -> str:
    """Stable hex digest of the experiment definition.

    Execution plumbing (out_dir, workers) is excluded: it can never
    change a result, so two runs of the same experiment share a digest
    no matter where their files land or how they were parallelized.
    """
    payload = asdict(config)
    payload.pop("out_dir")
    payload.pop("workers")
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"),
                      default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_config(path: str) -> ExperimentConfig:
    """Read a TOML experiment file; unknown keys are rejected."""
    with open(path, "rb") as fh:
        data = _toml.load(fh)
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    coerced = {}
    for key, value in data.items():
        fld = ExperimentConfig.__dataclass_fields__[key]
        if fld.type.startswith("tuple"):
            if not isinstance(value, (list, tuple)):
                raise ValueError(f"config key {key} must be a list")
            coerced[key] = tuple(value)
        else:
            coerced[key] = value
    return ExperimentConfig(**coerced)
