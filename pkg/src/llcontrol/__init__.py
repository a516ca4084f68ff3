"""Feedback control of the 1D Landau-Lifshitz equation.

Linear-spline Galerkin semi-discretization with Neumann boundaries, affine
and applied-field proportional feedback, their linearizations, RK4 time
stepping and Lyapunov-based diagnostics.
"""
__version__ = "0.1.0"

from .core import (
    SAT_TOL,
    ControlLaw,
    Equilibrium,
    MagnetizationField,
    PhysicalParams,
    cross,
    triple,
)
from .diagnostics import (
    DegenerateFieldError,
    DiagnosticSample,
    DiagnosticSeries,
    decay_rate,
    distance_to_equilibria_sq,
    exchange_energy,
    lemma3_integral,
    lemma4_ratio,
    lyapunov_affine,
    lyapunov_field,
    lyapunov_l2,
    nodal_gradient,
    trajectory_diagnostics,
)
from .discretization import (
    Discretization,
    build,
    h1_seminorm_sq,
    l2_inner,
    l2_norm_sq,
    thomas_solve,
    weak_laplacian,
)
from .dynamics import (
    RhsKind,
    SaturationWarning,
    effective_field,
    evaluate,
    rhs_affine,
    rhs_field,
    rhs_linear_affine,
    rhs_linear_field,
    rhs_uncontrolled,
)
from .integrator import (
    BlowUpError,
    ControlSchedule,
    IntegratorConfig,
    Phase,
    PhaseResult,
    TrajectoryRecord,
    default_dt,
    run,
    step_rk4,
)

from .config import ConfigError, InitialCondition, ScenarioConfig, load_config, parse_config
