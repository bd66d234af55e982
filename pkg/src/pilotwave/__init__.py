"""Stochastic pilot-wave walker dynamics with exponential memory.

Simulation of a walker whose velocity feels a wave force accumulated
over its whole past, plus tools for the deterministic orbital states
and for statistics of the long-time (invariant) measure.
"""

from .bessel import bessel_j1
from .model import (
    AssumptionReport,
    GridSpec,
    Kernel,
    ModelParams,
    Potential,
    VerifierConstants,
    WaveForce,
    energy_phi,
    growth_seminorm,
    perturbed_energy,
    verify_assumptions,
    weighted_path_norm,
)
from .integrator import (
    BlowUpError,
    ConfigError,
    HistoryBuffer,
    InitialPast,
    SimConfig,
    Trajectory,
    bridge_past,
    couple_simulate,
    em_step,
    memory_force,
    simulate,
    window_error_bound,
)
from .orbits import OrbitSolution, orbit_residual, orbital_past, solve_orbit
from .stats import (
    MomentSeries,
    RadialPdf,
    ensemble_energy_moments,
    pdf_l1_distance,
    peak_location,
    radial_pdf,
    structure_function,
    time_averaged_measure,
)

__all__ = [
    "AssumptionReport",
    "BlowUpError",
    "ConfigError",
    "GridSpec",
    "HistoryBuffer",
    "InitialPast",
    "Kernel",
    "ModelParams",
    "MomentSeries",
    "OrbitSolution",
    "Potential",
    "RadialPdf",
    "SimConfig",
    "Trajectory",
    "VerifierConstants",
    "WaveForce",
    "bessel_j1",
    "bridge_past",
    "couple_simulate",
    "em_step",
    "energy_phi",
    "ensemble_energy_moments",
    "growth_seminorm",
    "memory_force",
    "orbit_residual",
    "orbital_past",
    "pdf_l1_distance",
    "peak_location",
    "perturbed_energy",
    "radial_pdf",
    "simulate",
    "solve_orbit",
    "structure_function",
    "time_averaged_measure",
    "verify_assumptions",
    "weighted_path_norm",
    "window_error_bound",
]
