"""Physical parameters, unit conventions, and validation shared by all modules.

Internally every energy is in μeV with ħ = 1, so times are in 1/μeV. The CLI
converts times to 1/ξ₀ units or nanoseconds only at the I/O boundary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

# Reduced Planck constant in μeV·ns and Boltzmann constant in μeV/K.
HBAR_UEV_NS = 0.658212
KB_UEV_PER_K = 86.1733

# Waveguide parameters used throughout the bundled experiment presets
# (ω₀ = 12.15 GHz expressed in μeV, and the inter-resonator hopping).
DEFAULT_OMEGA0_UEV = 50.25
DEFAULT_XI0_UEV = 1.24


@dataclass(frozen=True)
class UnitConstants:
    """Physical constants used at the unit-conversion boundary."""

    hbar: float = HBAR_UEV_NS  # μeV·ns
    kB: float = KB_UEV_PER_K  # μeV/K

    def time_to_ns(self, t: float) -> float:
        """Convert an internal time (1/μeV) to nanoseconds."""
        return t * self.hbar


@dataclass(frozen=True)
class ModelParams:
    """Physical configuration of the cavity + waveguide system.

    omega0, xi0, omega_c are energies in μeV; eta is the dimensionless coupling
    ratio ξ/ξ₀; temperature is in kelvin. alpha0 is the initial coherent
    amplitude of the cavity and n0 its initial photon number.
    """

    omega0: float = DEFAULT_OMEGA0_UEV
    xi0: float = DEFAULT_XI0_UEV
    omega_c: float = DEFAULT_OMEGA0_UEV
    eta: float = 1.5
    temperature: float = 5.0
    alpha0: complex = 1.0 + 0.0j
    n0: float = 1.0

    @property
    def xi(self) -> float:
        """Cavity–waveguide coupling ξ = η·ξ₀ in μeV."""
        return self.eta * self.xi0


def validate(params: ModelParams) -> ModelParams:
    """Return ``params`` unchanged if all invariants hold.

    Raises ConfigurationError naming the first violated invariant.
    """
    if not params.omega0 > 0:
        raise ConfigurationError("omega0 nonpositive")
    if not params.xi0 >= 0:
        raise ConfigurationError("xi0 negative")
    if not params.omega_c > 0:
        raise ConfigurationError("omega_c nonpositive")
    if params.eta < 0:
        raise ConfigurationError("eta negative")
    if params.temperature < 0:
        raise ConfigurationError("temperature negative")
    if params.omega0 - 2.0 * params.xi0 <= 0:
        raise ConfigurationError("band extends to nonpositive frequency")
    if params.n0 < 0:
        raise ConfigurationError("n0 negative")
    if params.alpha0 != 0:
        # A coherent initial state fixes the photon number.
        expected = abs(params.alpha0) ** 2
        if abs(params.n0 - expected) > 1e-9 * max(1.0, expected):
            raise ConfigurationError("n0 inconsistent with alpha0 (expected |alpha0|^2)")
    return params


def band_edges(params: ModelParams) -> tuple[float, float]:
    """The waveguide band (ω₀ − 2ξ₀, ω₀ + 2ξ₀) in μeV."""
    return (params.omega0 - 2.0 * params.xi0, params.omega0 + 2.0 * params.xi0)


def classify_detuning(params: ModelParams) -> str:
    """Classify ω_c relative to the band.

    Returns one of ``outside_band``, ``near_upper_edge``, ``inside_band``.
    The near-edge threshold ω₀ + ξ₀ is a labeling aid for the experiment
    presets; no physics depends on it.
    """
    lo, hi = band_edges(params)
    if not (lo < params.omega_c < hi):
        return "outside_band"
    if params.omega_c > params.omega0 + params.xi0:
        return "near_upper_edge"
    return "inside_band"


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_j = j·dt on [0, t_max], t_max in internal 1/μeV units."""

    t_max: float
    n_steps: int

    def __post_init__(self):
        if not self.t_max > 0:
            raise ConfigurationError("t_max nonpositive")
        if self.n_steps < 1:
            raise ConfigurationError("n_steps must be a positive integer")

    @property
    def dt(self) -> float:
        return self.t_max / self.n_steps

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_steps + 1)

    def resolves_fastest_phase(self, params: ModelParams) -> bool:
        """Whether dt·(ω₀ + 2ξ₀) < 0.2, i.e. the lab-frame phase is resolved.

        Advisory only: the solver integrates the fast phase in closed form, so
        the bundled grids (dt = 0.01/ξ₀ → dt·(ω₀+2ξ₀) ≈ 0.43) are accurate
        despite failing this heuristic. It matters for consumers that sample
        lab-frame quantities pointwise.
        """
        return self.dt * (params.omega0 + 2.0 * params.xi0) < 0.2


def grid_from_xi0_units(t_max_xi0: float, n_steps: int, xi0: float) -> TimeGrid:
    """Build a TimeGrid from a horizon expressed in 1/ξ₀ units."""
    if xi0 <= 0:
        raise ConfigurationError("xi0 must be positive to use 1/xi0 time units")
    return TimeGrid(t_max=t_max_xi0 / xi0, n_steps=n_steps)


def validate_grid(grid: TimeGrid, params: ModelParams) -> TimeGrid:
    """Grid checks that need the physical parameters; warns on unresolved phase."""
    if not math.isfinite(grid.t_max):
        raise ConfigurationError("t_max not finite")
    if not grid.resolves_fastest_phase(params):
        warnings.warn(
            "dt*(omega0 + 2*xi0) >= 0.2: lab-frame phase is not resolved "
            "pointwise (the band-limited solver is unaffected)",
            RuntimeWarning,
            stacklevel=2,
        )
    return grid
