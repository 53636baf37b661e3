"""Numerical laboratory for soliton dynamics under a slowly varying potential.

Solves d_t u = d_x(-d_x^2 u - 3 u^2 + b u) pseudospectrally (ETDRK4 in the
rescaled frame), integrates the effective position/scale ODEs, extracts
soliton parameters by peak fitting and orthogonality refits, and verifies
the spectral, coercivity and conservation identities that underpin the
effective description.
"""

from .config import ConfigError, RunConfig, emit_config, parse_config, parse_config_file
from .effective import ODEState, ODETrajectory, integrate, ode_rhs, physical_trajectory
from .etdrk4 import SolverBlowupError, StepperConfig, simulate, step
from .fitting import AmbiguousPeakError, FitConvergenceError, PeakFit, RefitResult, orthogonality_refit, peak_fit
from .grids import FieldState, GridSpec, rescale_to_physical
from .potentials import PotentialSpec
from .runs import CompareResult, ConvergenceReport, SimRun, compare_run, convergence_study, run_simulation
from .solitons import SolitonParams, eta, eta_jet, sample_soliton, tau, theta

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config",
    "parse_config_file",
    "emit_config",
    "ODEState",
    "ODETrajectory",
    "integrate",
    "ode_rhs",
    "physical_trajectory",
    "SolverBlowupError",
    "StepperConfig",
    "simulate",
    "step",
    "AmbiguousPeakError",
    "FitConvergenceError",
    "PeakFit",
    "RefitResult",
    "peak_fit",
    "orthogonality_refit",
    "FieldState",
    "GridSpec",
    "rescale_to_physical",
    "PotentialSpec",
    "SimRun",
    "CompareResult",
    "ConvergenceReport",
    "run_simulation",
    "compare_run",
    "convergence_study",
    "SolitonParams",
    "theta",
    "tau",
    "eta",
    "eta_jet",
    "sample_soliton",
    "__version__",
]
