import numpy as np
import pytest

from crowsim import chain_oracle, volterra
from crowsim._core import _kernels_py, backend
from crowsim.errors import ConfigurationError, NumericalError
from crowsim.model import ModelParams, TimeGrid, grid_from_xi0_units
from crowsim.spectral import QuadratureSpec, tabulate_kernels
from crowsim.volterra import (
    TrajectorySolution,
    compute_coefficients,
    compute_v,
    convergence_study,
    solve,
    solve_u,
    steady_amplitude,
)

pytestmark = pytest.mark.filterwarnings("ignore:dt\\*\\(omega0")

P_COLD = ModelParams(temperature=0.0, alpha0=0.0, n0=0.0)


def _solve_pair(params, grid, quad):
    kern = tabulate_kernels(params, grid, quad)
    u = solve_u(params, grid, kern)
    return u, kern


def test_closed_cavity_is_pure_rotation():
    # η = 0: u(t) = e^{-iω_c t} exactly; the recurrence degenerates to w ≡ 1.
    p = ModelParams(eta=0.0, temperature=0.0, alpha0=0.0, n0=0.0)
    grid = TimeGrid(t_max=1.0, n_steps=1000)  # resolves the lab-frame phase
    u, kern = _solve_pair(p, grid, QuadratureSpec(nodes=64))
    np.testing.assert_allclose(u, np.exp(-1j * p.omega_c * grid.times()),
                               rtol=0, atol=1e-13)
    assert np.max(np.abs(np.abs(u) - 1.0)) < 1e-13
    v = compute_v(u, kern, grid)
    assert np.all(v == 0.0)
    kappa, kappa_tilde, omega_ren, guard = compute_coefficients(u, v, grid.dt)
    assert np.max(np.abs(kappa)) < 1e-9
    np.testing.assert_allclose(omega_ren, p.omega_c, rtol=1e-12)
    assert np.all(kappa_tilde == 0.0)
    assert not guard.any()


def test_u_against_finite_chain(quad256):
    # One spot configuration; the acceptance suite covers the full matrix.
    p = ModelParams(eta=1.0, temperature=0.0, alpha0=0.0, n0=0.0)
    grid = grid_from_xi0_units(10.0, 800, 1.24)
    u, _ = _solve_pair(p, grid, quad256)
    H = chain_oracle.build_hamiltonian(p, chain_oracle.ChainSpec(150))
    u_ref = chain_oracle.propagator_table(H, grid.times())
    assert np.max(np.abs(u - u_ref)) < 1e-3


def test_contractivity(quad256, short_grid):
    for eta in (0.5, 1.0, 2.0):
        p = ModelParams(eta=eta, temperature=0.0, alpha0=0.0, n0=0.0)
        u, _ = _solve_pair(p, short_grid, quad256)
        assert np.max(np.abs(u)) <= 1.0 + 1e-10, f"|u| > 1 at eta={eta}"


def test_weak_coupling_markovian_decay(quad256):
    # At band center and small η the decay follows e^{-J(ω_c)t/2} closely.
    p = ModelParams(eta=0.2, temperature=0.0, alpha0=0.0, n0=0.0)
    grid = grid_from_xi0_units(20.0, 1200, 1.24)
    u, _ = _solve_pair(p, grid, quad256)
    t = grid.times()
    k_markov = p.eta**2 * p.xi0  # J(ω₀)/2
    sel = (t >= 4.0) & (t <= 16.0)
    model = np.exp(-k_markov * t[sel])
    assert np.max(np.abs(np.abs(u[sel]) - model) / model) < 0.05


def test_incremental_v_matches_direct_double_sum(quad256):
    p = ModelParams(eta=1.0, alpha0=0.0, n0=0.0)  # T = 5 K
    grid = grid_from_xi0_units(5.0, 400, 1.24)
    u, kern = _solve_pair(p, grid, quad256)
    v = compute_v(u, kern, grid)

    gt = kern.g_tilde
    dt = grid.dt
    for j in (1, 7, 100, 400):
        idx = np.arange(j + 1)
        K, L = np.meshgrid(idx, idx, indexing="ij")
        G = np.where(L >= K, gt[L - K], np.conj(gt[np.abs(L - K)]))
        w = np.ones(j + 1)
        w[0] = w[-1] = 0.5
        direct = dt * dt * np.einsum("k,l,k,l,kl->", w, w, u[idx], np.conj(u[idx]), G)
        assert abs(direct.imag) < 1e-12 * max(1.0, abs(direct))
        assert abs(v[j] - direct.real) < 1e-9, f"v[{j}] off by {abs(v[j]-direct.real):.2e}"


def test_zero_temperature_v_is_identically_zero(quad256, short_grid):
    for eta in (0.5, 1.5):
        p = ModelParams(eta=eta, temperature=0.0, alpha0=0.0, n0=0.0)
        u, kern = _solve_pair(p, short_grid, quad256)
        assert np.all(compute_v(u, kern, short_grid) == 0.0)


def test_nonreal_v_is_reported(quad256, short_grid):
    # Feed the accumulator a negative-lag table that breaks Hermiticity: the
    # imaginary residue must be refused, not silently discarded.
    p = ModelParams(eta=1.0, alpha0=0.0, n0=0.0)
    u, kern = _solve_pair(p, short_grid, quad256)
    gt = np.asarray(kern.g_tilde, dtype=complex)
    corrupted = np.conj(gt) * (1.0 + 1e-3j)
    raw = _kernels_py.v_accumulate(u, gt, corrupted, short_grid.dt)
    with pytest.raises(NumericalError, match="nonreal v"):
        volterra._realize_v(raw)


def test_negative_v_is_reported():
    bad = np.array([0.0, 1e-4, -1e-6], dtype=complex)
    with pytest.raises(NumericalError, match="negative v"):
        volterra._realize_v(bad)


def test_mismatched_kernel_table_rejected(quad256, short_grid):
    p = ModelParams(eta=1.0, alpha0=0.0, n0=0.0)
    other = TimeGrid(t_max=short_grid.t_max, n_steps=short_grid.n_steps + 1)
    kern = tabulate_kernels(p, other, quad256)
    with pytest.raises(ConfigurationError, match="different grid"):
        solve_u(p, short_grid, kern)


def test_guard_flags_and_carried_coefficients(paper_grid):
    # At η = 0.6 the oscillatory decay passes through an amplitude zero below
    # the 1e-8 guard threshold (min |u| ≈ 2.6e-9 on this grid); coefficients
    # must stay finite there and carry the last preceding value.
    p = ModelParams(eta=0.6, temperature=0.0, alpha0=0.0, n0=0.0)
    sol = solve(p, paper_grid)
    assert isinstance(sol, TrajectorySolution)
    assert sol.guard_flags.any()
    assert not sol.guard_flags[0]
    assert np.all(np.isfinite(sol.kappa))
    assert np.all(np.isfinite(sol.omega_ren))
    j = int(np.argmax(sol.guard_flags))  # first guarded sample
    assert sol.kappa[j] == sol.kappa[j - 1]
    assert sol.omega_ren[j] == sol.omega_ren[j - 1]


def test_steady_amplitude():
    u = np.exp(-1j * np.linspace(0.0, 20.0, 101))
    assert steady_amplitude(u) == pytest.approx(1.0)
    assert steady_amplitude(0.5 * u, tail_fraction=0.5) == pytest.approx(0.5)
    with pytest.raises(ConfigurationError):
        steady_amplitude(u, tail_fraction=1.5)


def test_convergence_study_accepts_production_grid(quad256):
    p = ModelParams(eta=1.5, temperature=0.0, alpha0=0.0, n0=0.0)
    grid = grid_from_xi0_units(10.0, 1000, 1.24)
    kern = tabulate_kernels(p, grid, quad256)
    report = convergence_study(p, grid, kern, tolerance=1e-4, estimate_order=True)
    assert report.max_delta <= 1e-4
    assert 1.7 <= report.order_estimate <= 2.3


def test_convergence_study_rejects_coarse_grid(quad256):
    p = ModelParams(eta=1.5, temperature=0.0, alpha0=0.0, n0=0.0)
    grid = grid_from_xi0_units(10.0, 20, 1.24)
    kern = tabulate_kernels(p, grid, quad256)
    with pytest.raises(NumericalError, match="not converged"):
        convergence_study(p, grid, kern)


def test_backend_equivalence(rng):
    """Compiled and pure-Python inner loops agree to rounding."""
    n = 300
    t = np.arange(n + 1) * 0.02
    phase = np.exp(-1j * 7.0 * t)
    p = 0.01 * phase * (1 + 0.1 * rng.standard_normal(n + 1))
    q = 0.01 * phase * (1 + 0.1 * rng.standard_normal(n + 1))
    u = phase * np.exp(-0.3 * t)
    gt = 1.5 * phase * np.exp(-0.5 * t)

    w_py = _kernels_py.u_recurrence(p, q)
    v_py = _kernels_py.v_accumulate(u, gt, np.conj(gt), 0.02)
    if backend.backend_name == "cython":
        from crowsim._core import _kernels as _kernels_cy

        w_cy = _kernels_cy.u_recurrence(p, q)
        v_cy = _kernels_cy.v_accumulate(u, gt, np.conj(gt), 0.02)
        np.testing.assert_allclose(w_cy, w_py, rtol=0, atol=1e-12)
        np.testing.assert_allclose(v_cy, v_py, rtol=0, atol=1e-12)
    # the Hermitian-lag convention keeps the accumulation exactly real
    assert np.max(np.abs(v_py.imag)) == 0.0


def test_solve_pipeline_consistency(quad256, short_grid):
    p = ModelParams(eta=0.5)  # paper defaults otherwise: T = 5 K, α₀ = 1
    sol = solve(p, short_grid, quad=quad256)
    m = short_grid.n_steps + 1
    for arr in (sol.u, sol.v, sol.kappa, sol.kappa_tilde, sol.omega_ren, sol.guard_flags):
        assert len(arr) == m
    assert sol.u[0] == 1.0 + 0.0j
    assert sol.v[0] == 0.0
    assert sol.guard_flags.dtype == bool
    assert np.isrealobj(sol.v) and np.isrealobj(sol.kappa)
    # v grows from zero under a warm reservoir
    assert sol.v[-1] > 0.0
