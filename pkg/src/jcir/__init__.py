"""Jump-diffusion CIR process: characteristic functions, exact sampling,
transition-density lower bounds and ergodicity diagnostics."""

from .charfn import CfValue, FrequencyPoint, invariant_cf, jcir_cf, riccati_oracle
from .errors import JcirError, NumericalError, ValidationError
from .model import (
    AdmissibilityReport,
    ExponentialJumps,
    FiniteActivity,
    GammaJumps,
    InfiniteActivity,
    JcirParams,
    LevyMeasure,
    PointMasses,
    TemperedStableDensity,
    ZeroMeasure,
    check_admissible,
    first_moment,
)

__all__ = [
    "AdmissibilityReport",
    "CfValue",
    "ExponentialJumps",
    "FiniteActivity",
    "FrequencyPoint",
    "GammaJumps",
    "InfiniteActivity",
    "JcirError",
    "JcirParams",
    "LevyMeasure",
    "NumericalError",
    "PointMasses",
    "TemperedStableDensity",
    "ValidationError",
    "ZeroMeasure",
    "check_admissible",
    "first_moment",
    "invariant_cf",
    "jcir_cf",
    "riccati_oracle",
]
