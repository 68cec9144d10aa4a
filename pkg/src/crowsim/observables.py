"""Cavity observables and the Fock-basis reduced density matrix.

The field expectation, photon number, and outflow current are one-liners on
top of (u, v). The reduced state at any time is the thermally weighted
mixture of displaced number states Σ_n w_n·exp(za†)|n⟩⟨n|exp(z*a) with
z = α/(1+v) and geometric weights w_n = vⁿ/(1+v)^{n+1}, built here in a
truncated Fock basis and normalized by its computed trace — which sidesteps
the prefactor sign entirely (the analytic trace e^{|α|²/(1+v)} is still used
to bound what the truncation discarded).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ConfigurationError, NumericalError
from .volterra import _derivative

#: Hard cap on the auto-grown Fock dimension.
N_MAX_CAP = 256

#: Mixture terms are kept until this much cumulative weight is covered.
_MIXTURE_COVERAGE = 1.0 - 1e-12

#: Normalized diagonal weight allowed at the top Fock level.
_TAIL_TOL = 1e-6


def amplitude(u, alpha0: complex) -> np.ndarray:
    """⟨a(t_j)⟩ = u[j]·α₀."""
    return np.asarray(u, dtype=complex) * alpha0


def photon_number(u, v, n0: float) -> np.ndarray:
    """n(t_j) = |u[j]|²·n₀ + v[j]."""
    u = np.asarray(u, dtype=complex)
    return np.abs(u) ** 2 * n0 + np.asarray(v, dtype=float)


def photon_current(n, dt: float) -> np.ndarray:
    """Photon current into the waveguide, I = −ṅ.

    Uses the same difference stencil as the coefficient extraction so the
    cross-equation residual checks cancel exactly where they should.
    """
    return -_derivative(np.asarray(n, dtype=float), dt)


@dataclass
class FockDensityMatrix:
    """Truncated reduced density matrix with its construction inputs."""

    n_max: int
    elements: np.ndarray
    alpha: complex
    v: float
    truncation_error: float


def _lower_triangular_overlaps(z: complex, dim: int) -> np.ndarray:
    """C[m, n] = ⟨m|exp(z·a†)|n⟩ = z^{m−n}·sqrt(m!/n!)/(m−n)! for m ≥ n."""
    C = np.zeros((dim, dim), dtype=complex)
    if z == 0:
        np.fill_diagonal(C, 1.0)
        return C
    lg = gammaln(np.arange(dim + 1) + 1.0)
    rows, cols = np.tril_indices(dim)
    d = rows - cols
    C[rows, cols] = np.exp(
        d * np.log(complex(z)) + 0.5 * (lg[rows] - lg[cols]) - lg[d]
    )
    return C


def density_matrix(alpha: complex, v: float, n_max: int = 64) -> FockDensityMatrix:
    """Build ρ for given α(t), v(t) in a Fock basis of size n_max+1.

    The basis auto-grows (doubling, capped at ``N_MAX_CAP``) until the top
    diagonal entry holds ≤ 1e-6 of the trace; at the cap the state genuinely
    does not fit and "truncation too small" is raised. Small negative v from
    solver rounding (≥ −1e-10) is clipped to 0.
    """
    if v < 0.0:
        if v < -1e-10:
            raise ConfigurationError("v must be nonnegative")
        v = 0.0
    if n_max < 1:
        raise ConfigurationError("n_max must be at least 1")

    alpha = complex(alpha)
    z = alpha / (1.0 + v)
    ratio = v / (1.0 + v)

    # Geometric mixture: keep terms until the covered weight passes the
    # threshold; cumulative weight after N terms is 1 − ratio^N.
    if ratio == 0.0:
        n_mix_wanted = 1
    else:
        n_mix_wanted = max(1, math.ceil(math.log(1.0 - _MIXTURE_COVERAGE) / math.log(ratio)))

    dim_limit = N_MAX_CAP + 1
    dim = min(n_max + 1, dim_limit)
    while True:
        n_mix = min(n_mix_wanted, dim)
        weights = ratio ** np.arange(n_mix) / (1.0 + v)
        mixture_tail = ratio**n_mix  # exact geometric remainder

        C = _lower_triangular_overlaps(z, dim)
        K = C[:, :n_mix] * np.sqrt(weights)[None, :]
        rho = K @ K.conj().T
        trace = float(np.trace(rho).real)
        rho /= trace
        rho = 0.5 * (rho + rho.conj().T)

        tail = float(rho[-1, -1].real)
        if tail <= _TAIL_TOL:
            break
        if dim >= dim_limit:
            raise NumericalError(
                "truncation too small: top Fock level holds "
                f"{tail:.3e} of the trace at the n_max cap {N_MAX_CAP}"
            )
        dim = min(2 * dim, dim_limit)

    analytic_trace = math.exp(abs(alpha) ** 2 / (1.0 + v))
    fock_tail = max(0.0, 1.0 - trace / analytic_trace)
    return FockDensityMatrix(
        n_max=dim - 1,
        elements=rho,
        alpha=alpha,
        v=float(v),
        truncation_error=fock_tail + mixture_tail,
    )


def purity(rho: FockDensityMatrix) -> float:
    """tr(ρ²) in the truncated basis (= Σ|ρ_{mn}|² for Hermitian ρ)."""
    return float(np.real(np.vdot(rho.elements, rho.elements)))
