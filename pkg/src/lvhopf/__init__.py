"""Hopf bifurcation analysis and simulation for a harvested one-predator,
two-prey Lotka-Volterra system with distributed delay."""
from .config import RunConfig, load_config, parse_config, serialize_config
from .errors import (
    LVHopfError,
    InfeasibleParams,
    PoleReached,
    DiracNotDiscretizable,
    NoPositiveRoot,
    BracketNotFound,
    SingularSystem,
    BoundaryRoot,
    ConvergenceFailure,
    NoCrossingFound,
    DegenerateRoot,
    NotErlang,
    BlowUp,
    StepTooCoarse,
    TooShort,
    ConfigError,
)
from .kernels import DelayKernel
from .model import (
    Equilibrium,
    FeasibilityReport,
    LinearCoeffs,
    ModelParams,
    check_feasibility,
    compute_equilibrium,
    jacobian_no_delay,
    linear_coeffs,
    rhs_delayed,
    rhs_no_delay,
    routh_hurwitz,
)
from .simulate import (
    CycleMetrics,
    SimConfig,
    Trajectory,
    empirical_growth_rate,
    limit_cycle_metrics,
    simulate,
    simulate_chain,
    simulate_convolution,
)
from .spectral import (
    HopfPoint,
    critical_expectation,
    omega0,
    omega1,
    rightmost_root,
)

__version__ = "0.1.0"

__all__ = [
    "RunConfig",
    "load_config",
    "parse_config",
    "serialize_config",
    "BlowUp",
    "BoundaryRoot",
    "BracketNotFound",
    "ConfigError",
    "ConvergenceFailure",
    "CycleMetrics",
    "DegenerateRoot",
    "DelayKernel",
    "DiracNotDiscretizable",
    "Equilibrium",
    "FeasibilityReport",
    "HopfPoint",
    "InfeasibleParams",
    "LVHopfError",
    "LinearCoeffs",
    "ModelParams",
    "NoCrossingFound",
    "NoPositiveRoot",
    "NotErlang",
    "PoleReached",
    "SimConfig",
    "SingularSystem",
    "StepTooCoarse",
    "TooShort",
    "Trajectory",
    "check_feasibility",
    "compute_equilibrium",
    "critical_expectation",
    "empirical_growth_rate",
    "jacobian_no_delay",
    "limit_cycle_metrics",
    "linear_coeffs",
    "omega0",
    "omega1",
    "rhs_delayed",
    "rhs_no_delay",
    "rightmost_root",
    "routh_hurwitz",
    "simulate",
    "simulate_chain",
    "simulate_convolution",
]
