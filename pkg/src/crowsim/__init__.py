"""Exact open-system dynamics of a cavity mode coupled to a CROW waveguide.

The package solves the non-Markovian amplitude equation for the cavity
propagating function u(t), the thermal fluctuation v(t), the time-local
master-equation coefficients derived from them, and the exact Fock-basis
reduced density matrix of the mode, all checked against an independent
finite-chain diagonalization.
"""

from .chain_oracle import (
    ChainSpec,
    build_hamiltonian,
    mode_frequencies,
    propagator_element,
    propagator_table,
    thermal_v,
    thermal_v_table,
)
from .errors import ConfigurationError, NumericalError
from .experiments import PRESET_NAMES, SweepResult, run_scenario, sweep_eta
from .model import (
    HBAR_UEV_NS,
    KB_UEV_PER_K,
    ModelParams,
    TimeGrid,
    UnitConstants,
    band_edges,
    classify_detuning,
    grid_from_xi0_units,
    validate,
    validate_grid,
)
from .observables import (
    FockDensityMatrix,
    amplitude,
    density_matrix,
    photon_current,
    photon_number,
    purity,
)
from .spectral import (
    KernelTable,
    QuadratureSpec,
    bose_occupation,
    kernel_g,
    kernel_g_tilde,
    spectral_density,
    tabulate_kernels,
)
from .volterra import (
    ConvergenceReport,
    TrajectorySolution,
    compute_coefficients,
    compute_v,
    convergence_study,
    solve,
    solve_u,
    steady_amplitude,
)

__version__ = "0.1.0"

__all__ = [
    "ChainSpec",
    "ConfigurationError",
    "ConvergenceReport",
    "FockDensityMatrix",
    "HBAR_UEV_NS",
    "KB_UEV_PER_K",
    "KernelTable",
    "ModelParams",
    "NumericalError",
    "PRESET_NAMES",
    "QuadratureSpec",
    "SweepResult",
    "TimeGrid",
    "TrajectorySolution",
    "UnitConstants",
    "amplitude",
    "band_edges",
    "bose_occupation",
    "build_hamiltonian",
    "classify_detuning",
    "compute_coefficients",
    "compute_v",
    "convergence_study",
    "density_matrix",
    "grid_from_xi0_units",
    "kernel_g",
    "kernel_g_tilde",
    "mode_frequencies",
    "photon_current",
    "photon_number",
    "propagator_element",
    "propagator_table",
    "purity",
    "run_scenario",
    "solve",
    "solve_u",
    "spectral_density",
    "steady_amplitude",
    "sweep_eta",
    "tabulate_kernels",
    "thermal_v",
    "thermal_v_table",
    "validate",
    "validate_grid",
    "__version__",
]
