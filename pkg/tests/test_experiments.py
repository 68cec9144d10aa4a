import filecmp

import numpy as np
import pytest

from crowsim.errors import ConfigurationError
from crowsim.experiments import (
    FIGURE_ETAS,
    PRESET_NAMES,
    build_scenario,
    run_scenario,
    sweep_eta,
    sweep_eta_values,
)
from crowsim.model import ModelParams, grid_from_xi0_units
from crowsim.spectral import QuadratureSpec

pytestmark = pytest.mark.filterwarnings("ignore:dt\\*\\(omega0")

SMALL = dict(t_max_xi0=10.0, n_steps=800)
QUAD = QuadratureSpec(nodes=256)


def test_preset_names_are_stable():
    assert PRESET_NAMES == (
        "fig2a", "fig2b", "fig2c", "fig3_sweep",
        "fig4a", "fig4b", "fig5a", "fig5b", "fig5c", "fig5d",
    )
    assert FIGURE_ETAS == (0.3, 0.5, 0.7, 1.0, 1.5, 2.0)
    np.testing.assert_allclose(sweep_eta_values(), np.arange(1, 21) * 0.1)


def test_build_scenario_rejects_unknowns():
    with pytest.raises(ConfigurationError, match="unknown preset"):
        build_scenario("fig9z")
    with pytest.raises(ConfigurationError, match="override"):
        build_scenario("fig2a", {"coupling": 1.0})


def test_build_scenario_structure():
    s = build_scenario("fig2a")
    assert s.params.omega_c == pytest.approx(0.5 * 50.25)
    assert s.params.temperature == 0.0
    assert len(s.outputs) == len(FIGURE_ETAS)
    assert s.outputs[1].relpath == "eta_0.5/trajectory.csv"
    assert s.grid.n_steps == 6000
    # an eta override collapses the coupling set
    s1 = build_scenario("fig2c", {"eta": 0.5, **SMALL})
    assert len(s1.outputs) == 1
    assert s1.params.eta == 0.5
    assert s1.grid.n_steps == 800


def test_off_band_cavity_is_isolated(tmp_path):
    # fig2a detunes the cavity below the band: |u| must stay near 1.
    written = run_scenario(
        "fig2a", output_dir=tmp_path, overrides=SMALL, parallel=False, quad=QUAD
    )
    assert len(written) == len(FIGURE_ETAS)
    from crowsim.cli import read_table

    for path in written:
        _, _, cols = read_table(path)
        assert cols["abs_u"].min() >= 0.9, path


def test_millikelvin_noise_floor(tmp_path):
    written = run_scenario(
        "fig4a", output_dir=tmp_path,
        overrides={"eta": 1.0, **SMALL}, parallel=False, quad=QUAD,
    )
    from crowsim.cli import read_table

    _, _, cols = read_table(written[0])
    assert np.max(cols["v"]) < 1e-8


def test_sweep_eta_basics(short_grid):
    p = ModelParams(temperature=0.0, alpha0=0.0, n0=0.0)
    res = sweep_eta(p, short_grid, [0.0, 0.5], quad=QUAD, parallel=False)
    assert res.abs_u.shape == (2, short_grid.n_steps + 1)
    # η = 0 never decays
    assert res.steady[0] == pytest.approx(1.0, abs=1e-12)
    assert res.steady[1] < res.steady[0]
    with pytest.raises(ConfigurationError, match="ascending"):
        sweep_eta(p, short_grid, [1.0, 0.5], quad=QUAD, parallel=False)
    with pytest.raises(ConfigurationError, match="nonempty"):
        sweep_eta(p, short_grid, [], quad=QUAD, parallel=False)


def test_sweep_parallel_matches_serial(short_grid):
    p = ModelParams(temperature=0.0, alpha0=0.0, n0=0.0)
    etas = [0.3, 0.7, 1.1, 1.5]
    serial = sweep_eta(p, short_grid, etas, quad=QUAD, parallel=False)
    parallel = sweep_eta(p, short_grid, etas, quad=QUAD, parallel=True)
    np.testing.assert_array_equal(serial.abs_u, parallel.abs_u)


def test_sweep_failure_names_the_point(short_grid):
    p = ModelParams(temperature=0.0, alpha0=0.0, n0=0.0)
    with pytest.raises(ConfigurationError, match=r"eta=-1:"):
        sweep_eta(p, short_grid, [-1.0, 0.5], quad=QUAD, parallel=False)


def test_transition_crossing_location():
    """The 0.02 steady-amplitude crossing sits near η ≈ 1.33 at band center."""
    p = ModelParams(omega_c=50.25, temperature=0.0, alpha0=0.0, n0=0.0)
    grid = grid_from_xi0_units(60.0, 1500, 1.24)
    etas = np.round(np.arange(10, 17) * 0.1, 10)
    res = sweep_eta(p, grid, etas, quad=QUAD, parallel=True)
    above = res.steady > 0.02
    assert not above[0] and above[-1]
    i = int(np.argmax(above))
    s_lo, s_hi = res.steady[i - 1], res.steady[i]
    crossing = etas[i - 1] + 0.1 * (0.02 - s_lo) / (s_hi - s_lo)
    assert 1.25 <= crossing <= 1.45, f"crossing at {crossing:.3f}"


def test_run_scenario_is_deterministic(tmp_path):
    kw = dict(overrides={"eta": 0.5, **SMALL}, parallel=False, quad=QUAD)
    first = run_scenario("fig5b", output_dir=tmp_path / "a", **kw)
    second = run_scenario("fig5b", output_dir=tmp_path / "b", **kw)
    assert len(first) == len(second) == 1
    assert filecmp.cmp(first[0], second[0], shallow=False)


def test_run_scenario_sweep_outputs(tmp_path):
    written = run_scenario(
        "fig3_sweep", output_dir=tmp_path,
        overrides={"eta": 0.5, **SMALL}, parallel=False, quad=QUAD,
    )
    names = sorted(p.split("/")[-1] for p in map(str, written))
    assert names == ["steady.csv", "sweep.csv"]
