import filecmp
import os

import numpy as np
import pytest

from crowsim import cli
from crowsim.cli import RunConfig, main, read_table
from crowsim.model import ModelParams, grid_from_xi0_units
from crowsim.spectral import QuadratureSpec, tabulate_kernels
from crowsim.volterra import solve_u

pytestmark = pytest.mark.filterwarnings("ignore:dt\\*\\(omega0")

FAST = ["--t-max", "5", "--n-steps", "300", "--quad-nodes", "256"]


def run(args):
    return main(args)


def test_defaults_match_paper():
    c = RunConfig()
    assert c.omega0 == 50.25 and c.xi0 == 1.24 and c.omega_c == 50.25
    assert c.eta == 1.5 and c.temperature_K == 5.0
    assert c.t_max == 60.0 and c.n_steps == 6000
    assert c.quad_nodes == 512 and c.chain_sites == 600
    assert c.time_unit == "inv_xi0"


def test_simulate_default_grid_row_count(tmp_path):
    out = tmp_path / "run"
    assert run(["simulate", "--output-dir", str(out)]) == 0
    _, header, cols = read_table(out / "trajectory.csv")
    assert header == cli.TRAJECTORY_HEADER
    assert header == "t,re_u,im_u,abs_u,v,n,current,kappa,kappa_tilde,omega_ren,guard"
    assert len(cols["t"]) == 6001
    assert cols["t"][-1] == pytest.approx(60.0)


def test_round_trip_is_byte_identical(tmp_path):
    out = tmp_path / "rt"
    assert run(["simulate", "--output-dir", str(out), *FAST]) == 0
    src = out / "trajectory.csv"
    comments, header, cols = read_table(src)
    dst = out / "again.csv"
    cli.write_table(
        dst, comments, header, [cols[n] for n in header.split(",")],
        int_cols=("guard",),
    )
    assert src.read_bytes() == dst.read_bytes()


def test_closed_cavity_columns(tmp_path):
    out = tmp_path / "eta0"
    assert run(["simulate", "--eta", "0", "--output-dir", str(out), *FAST]) == 0
    _, _, cols = read_table(out / "trajectory.csv")
    assert np.max(np.abs(cols["abs_u"] - 1.0)) < 1e-12
    assert np.all(cols["v"] == 0.0)
    assert np.all(cols["guard"] == 0.0)


def test_zero_temperature_v_column(tmp_path):
    out = tmp_path / "cold"
    assert run(["simulate", "--temperature-K", "0", "--output-dir", str(out), *FAST]) == 0
    _, _, cols = read_table(out / "trajectory.csv")
    assert np.all(cols["v"] == 0.0)


def test_time_unit_ns(tmp_path):
    out = tmp_path / "ns"
    assert run(
        ["simulate", "--time-unit", "ns", "--t-max", "2", "--n-steps", "200",
         "--quad-nodes", "256", "--output-dir", str(out)]
    ) == 0
    comments, _, cols = read_table(out / "trajectory.csv")
    assert any("time_unit = ns" in c for c in comments)
    assert cols["t"][-1] == pytest.approx(2.0)  # t_max interpreted in ns
    # 2 ns is a longer physical horizon than 2/xi0, so the dynamics differ
    out2 = tmp_path / "xi"
    assert run(
        ["simulate", "--time-unit", "inv_xi0", "--t-max", "2", "--n-steps", "200",
         "--quad-nodes", "256", "--output-dir", str(out2)]
    ) == 0
    _, _, cols2 = read_table(out2 / "trajectory.csv")
    assert cols["abs_u"][-1] != cols2["abs_u"][-1]


def test_bad_time_unit_is_config_error(tmp_path, capsys):
    assert run(["simulate", "--time-unit", "weeks", *FAST]) == 1
    assert "time_unit" in capsys.readouterr().err


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# comment line\n"
        "eta = 0.4          # inline comment\n"
        "t_max = 5\n"
        "n_steps = 300\n"
        "quad_nodes = 256\n"
        f"output_dir = {tmp_path / 'a'}\n"
    )
    assert run(["simulate", "--config", str(cfg)]) == 0
    # a flag beats the file
    assert run(
        ["simulate", "--config", str(cfg), "--eta", "0.8",
         "--output-dir", str(tmp_path / "b")]
    ) == 0
    _, _, cols_a = read_table(tmp_path / "a" / "trajectory.csv")
    _, _, cols_b = read_table(tmp_path / "b" / "trajectory.csv")
    assert cols_b["abs_u"][-1] != cols_a["abs_u"][-1]


def test_unknown_config_key_is_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("etaa = 0.4\n")
    assert run(["simulate", "--config", str(cfg)]) == 1
    assert "unknown config key" in capsys.readouterr().err


def test_malformed_config_values(tmp_path):
    cfg = tmp_path / "bad2.cfg"
    cfg.write_text("n_steps = many\n")
    assert run(["simulate", "--config", str(cfg)]) == 1
    cfg.write_text("just a line without equals\n")
    assert run(["simulate", "--config", str(cfg)]) == 1


def test_unknown_flag_is_config_error(capsys):
    assert run(["simulate", "--no-such-flag"]) == 1
    assert run(["rho", *FAST]) == 1  # missing required --at-time
    assert run([]) == 1  # missing subcommand


def test_quadrature_starvation_is_numerical_error(capsys):
    assert run(["simulate", "--quad-nodes", "8", "--t-max", "5", "--n-steps", "300"]) == 2
    assert "not converged" in capsys.readouterr().err


def test_unwritable_output_dir_is_io_error(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert run(["simulate", *FAST, "--output-dir", str(blocker / "x")]) == 3


def test_sweep_matches_simulate_for_single_eta(tmp_path):
    out_sweep = tmp_path / "sw"
    out_sim = tmp_path / "sim"
    assert run(
        ["sweep", "--eta-min", "0.7", "--eta-max", "0.7", "--eta-step", "0.1",
         *FAST, "--output-dir", str(out_sweep), "--serial"]
    ) == 0
    assert run(["simulate", "--eta", "0.7", *FAST, "--output-dir", str(out_sim)]) == 0
    _, _, sweep_cols = read_table(out_sweep / "sweep.csv")
    _, _, sim_cols = read_table(out_sim / "trajectory.csv")
    assert sweep_cols["eta"][0] == 0.7
    np.testing.assert_array_equal(sweep_cols["abs_u"], sim_cols["abs_u"])
    np.testing.assert_array_equal(sweep_cols["t"], sim_cols["t"])
    _, _, steady = read_table(out_sweep / "steady.csv")
    assert list(steady) == ["eta", "steady_amplitude"]


def test_sweep_empty_range_is_config_error(capsys):
    assert run(["sweep", "--eta-min", "1.0", "--eta-max", "0.5", *FAST]) == 1
    assert "eta" in capsys.readouterr().err


def test_rho_snapshot(tmp_path):
    out = tmp_path / "rho0"
    assert run(
        ["rho", "--at-time", "0", "--temperature-K", "0", *FAST,
         "--output-dir", str(out)]
    ) == 0
    comments, header, cols = read_table(out / "rho.csv")
    assert header == "p,q,re,im"
    meta = comments[0]
    assert meta.startswith("# alpha_re=")
    fields = dict(
        item.split("=") for item in meta.lstrip("# ").split(", ")
    )
    assert float(fields["alpha_re"]) == pytest.approx(1.0)
    assert float(fields["v"]) == 0.0
    assert float(fields["purity"]) == pytest.approx(1.0, abs=1e-8)
    assert float(fields["trunc_err"]) >= 0.0
    # upper triangle only
    assert np.all(cols["p"] <= cols["q"])


def test_rho_snaps_to_nearest_grid_point(tmp_path):
    out = tmp_path / "rho_snap"
    # dt = 5/300 in 1/xi0 units; 1.004 should snap to sample 60 at t=1.0
    assert run(
        ["rho", "--at-time", "1.004", "--temperature-K", "0", *FAST,
         "--output-dir", str(out)]
    ) == 0
    comments, _, _ = read_table(out / "rho.csv")
    meta = dict(item.split("=") for item in comments[0].lstrip("# ").split(", "))
    params = ModelParams(temperature=0.0)
    grid = grid_from_xi0_units(5.0, 300, params.xi0)
    kern = tabulate_kernels(params, grid, QuadratureSpec(256))
    u = solve_u(params, grid, kern)
    expected = u[60] * params.alpha0
    assert float(meta["alpha_re"]) == pytest.approx(expected.real, abs=1e-15)
    assert float(meta["alpha_im"]) == pytest.approx(expected.imag, abs=1e-15)


def test_rho_outside_grid_is_config_error(capsys):
    assert run(["rho", "--at-time", "999", *FAST]) == 1
    assert "outside" in capsys.readouterr().err


def test_rho_truncation_cap_is_numerical_error(tmp_path, capsys):
    assert run(
        ["rho", "--at-time", "0", "--alpha0-re", "14", "--n0", "196",
         "--temperature-K", "0", *FAST, "--output-dir", str(tmp_path)]
    ) == 2
    assert "truncation" in capsys.readouterr().err


def test_oracle_check_closed_cavity(tmp_path, capsys):
    out = tmp_path / "oracle"
    code = run(
        ["oracle-check", "--eta", "0", "--t-max", "8", "--n-steps", "400",
         "--quad-nodes", "256", "--chain-sites", "64", "--output-dir", str(out)]
    )
    captured = capsys.readouterr().out
    assert code == 0
    assert captured.count("PASS") == 2
    _, header, cols = read_table(out / "oracle.csv")
    assert header == cli.ORACLE_HEADER
    assert np.max(cols["abs_diff_u"]) < 1e-10
    assert np.max(cols["abs_diff_v"]) < 1e-10


def test_oracle_check_short_chain_reports_requirement(capsys):
    # default t_max = 60/xi0 needs ceil(2*1.24*48.387/0.8) = 150 sites
    assert run(["oracle-check", "--chain-sites", "50"]) == 1
    err = capsys.readouterr().err
    assert "150" in err and "chain" in err


def test_svg_flag_does_not_change_csv(tmp_path):
    plain = tmp_path / "plain"
    with_svg = tmp_path / "svg"
    assert run(["simulate", *FAST, "--output-dir", str(plain)]) == 0
    assert run(["simulate", *FAST, "--svg", "--output-dir", str(with_svg)]) == 0
    assert (with_svg / "trajectory.svg").exists()
    content = (with_svg / "trajectory.svg").read_text()
    assert content.startswith("<?xml") and "<svg" in content
    assert filecmp.cmp(
        plain / "trajectory.csv", with_svg / "trajectory.csv", shallow=False
    )


def test_scenario_command(tmp_path):
    out = tmp_path / "sc"
    assert run(
        ["scenario", "fig2c", "--eta", "0.5", "--t-max", "10", "--n-steps", "800",
         "--quad-nodes", "256", "--output-dir", str(out), "--serial"]
    ) == 0
    assert (out / "fig2c" / "eta_0.5" / "trajectory.csv").exists()
    assert run(["scenario", "no_such_preset"]) == 1
