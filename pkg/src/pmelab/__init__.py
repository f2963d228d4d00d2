"""Finite-volume lab for porous-medium flow against a Gibbs weight.

Builds normalized weighted meshes, evolves d(mu)/dt = c_eq * L mu^(1+beta)
with monotone explicit or backward-Euler stepping, estimates the spectral gap
of the weighted operator, and certifies the quantitative behavior of the flow
(mass conservation, contraction, comparison, pressure lower bounds and the
two-phase L1-Lp smoothing envelope) as executable checks.
"""

from .analysis import (
    BarrierParams,
    EnvelopeParams,
    aronson_benilan_margin,
    barrier_margin,
    barrier_select,
    decay_envelope,
    detect_t0,
    dissipation_residual,
    dp,
    kp,
    l1_distance,
    unconditional_kp_bound,
)
from .evolve import (
    SolverConfig,
    Trajectory,
    rescale_solution,
    run,
    run_dirichlet_cascade,
    stable_dt,
    step_explicit,
    step_implicit,
)
from .kernels import backend_name
from .mesh import DensityField, Potential, WeightedMesh, build_mesh, lp_norm, mass
from .operators import (
    BoundaryCondition,
    apply_L,
    dirichlet_energy,
    pressure,
    psi,
)
from .spectral import SpectralResult, estimate_poincare

__version__ = "0.1.0"

__all__ = [
    "BarrierParams",
    "BoundaryCondition",
    "DensityField",
    "EnvelopeParams",
    "Potential",
    "SolverConfig",
    "SpectralResult",
    "Trajectory",
    "WeightedMesh",
    "apply_L",
    "aronson_benilan_margin",
    "backend_name",
    "barrier_margin",
    "barrier_select",
    "build_mesh",
    "decay_envelope",
    "detect_t0",
    "dirichlet_energy",
    "dissipation_residual",
    "dp",
    "estimate_poincare",
    "kp",
    "l1_distance",
    "lp_norm",
    "mass",
    "pressure",
    "psi",
    "rescale_solution",
    "run",
    "run_dirichlet_cascade",
    "stable_dt",
    "step_explicit",
    "step_implicit",
    "unconditional_kp_bound",
    "__version__",
]
