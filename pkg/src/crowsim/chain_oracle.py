"""Independent ground truth from the finite cavity+chain Hamiltonian.

The full model is quadratic, so the cavity propagator u(t) equals the
single-excitation matrix element [e^{−iHt}]₀₀ of the (n_sites+1)-dimensional
tight-binding Hamiltonian, and the thermal fluctuation v(t) is a sum of
transition probabilities out of the uncoupled-chain Bloch modes weighted by
their initial occupations. Both are exact until the wavefront reflects off
the far end of the chain and returns, which sets the validity horizon.

This module deliberately shares no numerics with the Volterra solver beyond
the Bose factor: dense diagonalization versus product integration.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import ModelParams, validate
from .spectral import bose_occupation

#: Fraction of the out-and-back reflection time accepted as trustworthy.
HORIZON_SAFETY = 0.8

DEFAULT_SITES = 600


@dataclass(frozen=True)
class ChainSpec:
    """Finite-chain layout: waveguide site count (cavity is index 0 extra)."""

    n_sites: int = DEFAULT_SITES

    def __post_init__(self):
        if self.n_sites < 8:
            raise ConfigurationError("n_sites must be at least 8")

    def t_valid(self, xi0: float) -> float:
        """Horizon before boundary reflections reach the cavity again.

        The band's maximum group velocity is 2ξ₀ sites per unit time; the
        wavefront must travel out and back, with a safety margin on top.
        """
        if xi0 == 0.0:
            return math.inf
        return HORIZON_SAFETY * self.n_sites / (2.0 * xi0)


def build_hamiltonian(params: ModelParams, spec: ChainSpec) -> np.ndarray:
    """Real symmetric (n_sites+1)² matrix; index 0 is the cavity.

    Signs follow the model Hamiltonian as written: chain hopping enters with
    an explicit minus, the cavity–first-site coupling with an explicit plus.
    """
    validate(params)
    n = spec.n_sites
    H = np.zeros((n + 1, n + 1))
    H[0, 0] = params.omega_c
    idx = np.arange(1, n + 1)
    H[idx, idx] = params.omega0
    H[idx[:-1], idx[:-1] + 1] = -params.xi0
    H[idx[:-1] + 1, idx[:-1]] = -params.xi0
    H[0, 1] = H[1, 0] = params.xi
    return H


@functools.lru_cache(maxsize=8)
def _eigh_from_bytes(buf: bytes, n: int):
    H = np.frombuffer(buf, dtype=float).reshape(n, n)
    eps, S = np.linalg.eigh(H)
    eps.setflags(write=False)
    S.setflags(write=False)
    return eps, S


def _eigh(H: np.ndarray):
    H = np.ascontiguousarray(H, dtype=float)
    return _eigh_from_bytes(H.tobytes(), H.shape[0])


def propagator_element(H: np.ndarray, t: float) -> complex:
    """[e^{−iHt}]₀₀ by eigendecomposition (cached per matrix)."""
    return complex(propagator_table(H, np.asarray([t], dtype=float))[0])


def propagator_table(H: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Vectorized propagator element over a time array."""
    eps, S = _eigh(H)
    weights = S[0, :] ** 2
    phases = np.exp(-1j * np.outer(eps, np.asarray(times, dtype=float)))
    return weights @ phases


def _mode_overlaps(H: np.ndarray, spec: ChainSpec) -> np.ndarray:
    """W[m, j] = ⟨Bloch mode m|eigvec j⟩ · S₀ⱼ, real (n_sites × n_sites+1)."""
    eps, S = _eigh(H)
    n = spec.n_sites
    if S.shape[0] != n + 1:
        raise ConfigurationError("ChainSpec does not match the Hamiltonian size")
    sites = np.arange(1, n + 1)
    modes = np.arange(1, n + 1)
    phi = math.sqrt(2.0 / (n + 1)) * np.sin(
        np.outer(sites, modes) * math.pi / (n + 1)
    )
    return (phi.T @ S[1:, :]) * S[0, :][None, :]


def mode_frequencies(params: ModelParams, spec: ChainSpec) -> np.ndarray:
    """Uncoupled-chain Bloch energies ω_k = ω₀ − 2ξ₀·cos(k_m), m = 1..n_sites."""
    k = np.arange(1, spec.n_sites + 1) * math.pi / (spec.n_sites + 1)
    return params.omega0 - 2.0 * params.xi0 * np.cos(k)


def thermal_v(H: np.ndarray, params: ModelParams, spec: ChainSpec, t: float) -> float:
    """v_oracle(t) = Σ_m n̄(ω_{k_m}, T)·|A_m(t)|² for a single time."""
    return float(thermal_v_table(H, params, spec, np.asarray([t], dtype=float))[0])


def thermal_v_table(
    H: np.ndarray, params: ModelParams, spec: ChainSpec, times: np.ndarray
) -> np.ndarray:
    """Vectorized thermal-v oracle over a time array."""
    if params.temperature == 0.0:
        return np.zeros(len(np.atleast_1d(times)))
    eps, _ = _eigh(H)
    W = _mode_overlaps(H, spec)
    nbar = bose_occupation(mode_frequencies(params, spec), params.temperature)
    phases = np.exp(-1j * np.outer(eps, np.asarray(times, dtype=float)))
    # W is real; two real GEMMs beat one complex-promoted product.
    A_re = W @ phases.real
    A_im = W @ phases.imag
    return nbar @ (A_re * A_re + A_im * A_im)
