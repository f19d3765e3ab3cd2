"""Lifetime analysis of a two-server alternating standby system with repair.

One server works while the other is repaired; the system dies the first time a
working server fails before its partner's repair is done.
"""

from .distributions import (
    Deterministic,
    DistributionSpec,
    Exponential,
    Gamma,
    Uniform,
    Weibull,
    cdf,
    cdf_left,
    closed_lst,
    parse_distribution,
    sample,
)
from .errors import (
    BracketNotFoundError,
    FixedPointError,
    InversionUnstableError,
    MomentDivergedError,
    NonTerminatingSystemError,
    QuadratureError,
    StandbyError,
)
from .inversion import SurvivalCurve, SurvivalPoint, quantile, survival, survival_curve
from .simulator import (
    SimulationSummary,
    estimate_lst,
    estimate_mean,
    estimate_survival,
    simulate_lifetime,
    simulate_lifetimes,
)
from .transform import (
    SystemModel,
    TransformResult,
    moment,
    phi,
    system_lst_closed,
    system_lst_fixed_point,
    system_lst_scenario_sum,
    work_lst,
)

__version__ = "0.1.0"

__all__ = [
    "BracketNotFoundError",
    "Deterministic",
    "DistributionSpec",
    "Exponential",
    "FixedPointError",
    "Gamma",
    "InversionUnstableError",
    "MomentDivergedError",
    "NonTerminatingSystemError",
    "QuadratureError",
    "SimulationSummary",
    "StandbyError",
    "SurvivalCurve",
    "SurvivalPoint",
    "SystemModel",
    "TransformResult",
    "Uniform",
    "Weibull",
    "cdf",
    "cdf_left",
    "closed_lst",
    "estimate_lst",
    "estimate_mean",
    "estimate_survival",
    "moment",
    "parse_distribution",
    "phi",
    "quantile",
    "sample",
    "simulate_lifetime",
    "simulate_lifetimes",
    "survival",
    "survival_curve",
    "system_lst_closed",
    "system_lst_fixed_point",
    "system_lst_scenario_sum",
    "work_lst",
]
