"""Command-line surface: config resolution, CSV/SVG emission, subcommands.

Subcommands: ``simulate`` (one trajectory), ``sweep`` (η × t amplitude
surface), ``rho`` (Fock density-matrix snapshot), ``oracle-check``
(finite-chain verification), ``scenario`` (named paper-figure presets).

Config is a flat ``key = value`` file with ``#`` comments; every key has a
flag spelled with dashes that overrides it. Unknown keys are hard errors.
Exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 I/O.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import chain_oracle, experiments, observables, spectral, svgplot, volterra
from .errors import ConfigurationError, NumericalError
from .model import (
    HBAR_UEV_NS,
    DEFAULT_OMEGA0_UEV,
    DEFAULT_XI0_UEV,
    ModelParams,
    TimeGrid,
)
from .spectral import QuadratureSpec

_TIME_UNITS = ("inv_xi0", "ns")


@dataclass
class RunConfig:
    """Flat run configuration; defaults are the paper's parameters."""

    omega0: float = DEFAULT_OMEGA0_UEV
    xi0: float = DEFAULT_XI0_UEV
    omega_c: float = DEFAULT_OMEGA0_UEV
    eta: float = 1.5
    temperature_K: float = 5.0
    alpha0_re: float = 1.0
    alpha0_im: float = 0.0
    n0: float = 1.0
    t_max: float = 60.0  # in time_unit units
    n_steps: int = 6000
    quad_nodes: int = 512
    quad_rel_tol: float = 1e-10
    chain_sites: int = 600
    n_max_fock: int = 64
    output_dir: str = "."
    time_unit: str = "inv_xi0"


def model_params(config: RunConfig) -> ModelParams:
    return ModelParams(
        omega0=config.omega0,
        xi0=config.xi0,
        omega_c=config.omega_c,
        eta=config.eta,
        temperature=config.temperature_K,
        alpha0=complex(config.alpha0_re, config.alpha0_im),
        n0=config.n0,
    )


def _internal_time(value: float, config: RunConfig) -> float:
    """Convert a time in config units to internal 1/μeV."""
    if config.time_unit == "inv_xi0":
        return value / config.xi0
    return value / HBAR_UEV_NS


def time_grid(config: RunConfig) -> TimeGrid:
    return TimeGrid(t_max=_internal_time(config.t_max, config), n_steps=config.n_steps)


def quadrature(config: RunConfig) -> QuadratureSpec:
    return QuadratureSpec(nodes=config.quad_nodes, rel_tol=config.quad_rel_tol)


def _display_times(times_internal: np.ndarray, config_or_unit, xi0: float) -> np.ndarray:
    unit = (
        config_or_unit.time_unit
        if isinstance(config_or_unit, RunConfig)
        else config_or_unit
    )
    if unit == "inv_xi0":
        return times_internal * xi0
    return times_internal * HBAR_UEV_NS


def _time_comment(unit: str, xi0: float) -> str:
    return (
        f"# time_unit = {unit}; 1/xi0 = {HBAR_UEV_NS / xi0:.9g} ns; "
        f"hbar = {HBAR_UEV_NS:g} ueV*ns"
    )


# ---------------------------------------------------------------------------
# Config file / flag plumbing
# ---------------------------------------------------------------------------


def load_config_file(path: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    raw = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigurationError(
                    f"{path}:{lineno}: expected 'key = value', got {line.strip()!r}"
                )
            key, value = text.split("=", 1)
            raw[key.strip()] = value.strip()
    return raw


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(raw: dict) -> dict:
    out = {}
    for key, text in raw.items():
        if key not in _FIELD_TYPES:
            raise ConfigurationError(f"unknown config key: {key!r}")
        ftype = _FIELD_TYPES[key]
        try:
            if ftype == "int":
                out[key] = int(text)
            elif ftype == "float":
                out[key] = float(text)
            else:
                out[key] = text
        except ValueError as exc:
            raise ConfigurationError(f"invalid value for {key}: {text!r}") from exc
    return out


def _validate_config(config: RunConfig) -> RunConfig:
    if config.time_unit not in _TIME_UNITS:
        raise ConfigurationError(
            f"time_unit must be one of {_TIME_UNITS}, got {config.time_unit!r}"
        )
    return config


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """defaults < config file < explicit flags."""
    values = {f.name: getattr(RunConfig(), f.name) for f in fields(RunConfig)}
    config_path = getattr(args, "config", None)
    if config_path:
        values.update(_coerce(load_config_file(config_path)))
    for f in fields(RunConfig):
        flag_val = getattr(args, f.name, None)
        if flag_val is not None:
            values[f.name] = flag_val
    return _validate_config(RunConfig(**values))


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as configuration errors (exit 1)."""

    def error(self, message):
        raise ConfigurationError(message)


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", metavar="FILE", help="flat key = value config file")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        ftype = {"int": int, "float": float}.get(f.type, str)
        parser.add_argument(
            flag,
            dest=f.name,
            type=ftype,
            default=None,
            help=f"override {f.name} (default {getattr(RunConfig(), f.name)!r})",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crowsim", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="solve one trajectory, write trajectory.csv")
    _add_config_flags(p)
    p.add_argument("--svg", action="store_true", help="also write trajectory.svg")

    p = sub.add_parser("sweep", help="η sweep of |u|, write sweep.csv + steady.csv")
    _add_config_flags(p)
    p.add_argument("--eta-min", type=float, default=0.1)
    p.add_argument("--eta-max", type=float, default=2.0)
    p.add_argument("--eta-step", type=float, default=0.1)
    p.add_argument("--svg", action="store_true", help="also write sweep.svg")
    p.add_argument("--serial", action="store_true", help="disable process parallelism")

    p = sub.add_parser("rho", help="density-matrix snapshot, write rho.csv")
    _add_config_flags(p)
    p.add_argument(
        "--at-time", type=float, required=True,
        help="snapshot time (in time_unit units, snapped to the grid)",
    )
    p.add_argument("--svg", action="store_true", help="also write rho.svg")

    p = sub.add_parser("oracle-check", help="verify u, v against the finite chain")
    _add_config_flags(p)

    p = sub.add_parser("scenario", help="run a named paper-figure preset")
    _add_config_flags(p)
    p.add_argument("name", choices=experiments.PRESET_NAMES)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--serial", action="store_true")

    return parser


# ---------------------------------------------------------------------------
# CSV emission (the formats the acceptance tests read back)
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_table(path, comments, header: str, columns, int_cols=()) -> str:
    """Write a CSV with comment lines, a header, and %.17g float cells."""
    names = header.split(",")
    cols = [np.asarray(c) for c in columns]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in comments:
            fh.write(line + "\n")
        fh.write(header + "\n")
        for i in range(len(cols[0])):
            cells = [
                str(int(col[i])) if name in int_cols else _fmt(col[i])
                for name, col in zip(names, cols)
            ]
            fh.write(",".join(cells) + "\n")
    return str(path)


def read_table(path):
    """Inverse of write_table: (comments, header, dict of float columns)."""
    comments, header, rows = [], None, []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                comments.append(line)
            elif header is None:
                header = line
            elif line:
                rows.append([float(cell) for cell in line.split(",")])
    data = np.asarray(rows, dtype=float) if rows else np.empty((0, 0))
    names = header.split(",") if header else []
    return comments, header, {n: data[:, i] for i, n in enumerate(names)}


TRAJECTORY_HEADER = "t,re_u,im_u,abs_u,v,n,current,kappa,kappa_tilde,omega_ren,guard"


def write_trajectory_csv(
    path, solution: volterra.TrajectorySolution, params: ModelParams,
    time_unit: str = "inv_xi0",
) -> str:
    n = observables.photon_number(solution.u, solution.v, params.n0)
    current = observables.photon_current(n, solution.grid.dt)
    t = _display_times(solution.grid.times(), time_unit, params.xi0)
    comments = [
        "# crowsim trajectory",
        _time_comment(time_unit, params.xi0),
        "# rates (kappa, kappa_tilde) and omega_ren in ueV; u, v, n dimensionless",
        f"# omega0={params.omega0:g} xi0={params.xi0:g} omega_c={params.omega_c:g}"
        f" eta={params.eta:g} temperature_K={params.temperature:g}",
    ]
    return write_table(
        path,
        comments,
        TRAJECTORY_HEADER,
        [
            t, solution.u.real, solution.u.imag, np.abs(solution.u),
            solution.v, n, current, solution.kappa, solution.kappa_tilde,
            solution.omega_ren, solution.guard_flags.astype(int),
        ],
        int_cols=("guard",),
    )


def write_sweep_csv(
    path, result: experiments.SweepResult, xi0: float, time_unit: str = "inv_xi0"
) -> str:
    t = _display_times(result.times, time_unit, xi0)
    n_eta, n_t = result.abs_u.shape
    eta_col = np.repeat(result.eta_values, n_t)
    t_col = np.tile(t, n_eta)
    return write_table(
        path,
        ["# crowsim eta sweep", _time_comment(time_unit, xi0)],
        "eta,t,abs_u",
        [eta_col, t_col, result.abs_u.reshape(-1)],
    )


def write_steady_csv(path, result: experiments.SweepResult) -> str:
    return write_table(
        path,
        ["# crowsim steady amplitudes (tail mean of |u|)"],
        "eta,steady_amplitude",
        [result.eta_values, result.steady],
    )


def write_rho_csv(path, rho: observables.FockDensityMatrix, pur: float) -> str:
    dim = rho.n_max + 1
    p_idx, q_idx = np.triu_indices(dim)
    vals = rho.elements[p_idx, q_idx]
    meta = (
        f"# alpha_re={_fmt(rho.alpha.real)}, alpha_im={_fmt(rho.alpha.imag)}, "
        f"v={_fmt(rho.v)}, purity={_fmt(pur)}, trunc_err={_fmt(rho.truncation_error)}"
    )
    return write_table(
        path, [meta], "p,q,re,im",
        [p_idx, q_idx, vals.real, vals.imag],
        int_cols=("p", "q"),
    )


ORACLE_HEADER = "t,re_u,im_u,re_u_oracle,im_u_oracle,abs_diff_u,v,v_oracle,abs_diff_v"


def write_oracle_csv(path, t_display, u, u_oracle, v, v_oracle) -> str:
    return write_table(
        path,
        ["# crowsim oracle comparison"],
        ORACLE_HEADER,
        [
            t_display, u.real, u.imag, u_oracle.real, u_oracle.imag,
            np.abs(u - u_oracle), v, v_oracle, np.abs(v - v_oracle),
        ],
    )


def write_trajectory_svg(
    path, solution: volterra.TrajectorySolution, params: ModelParams,
    focus: str = "abs_u", time_unit: str = "inv_xi0",
) -> str:
    n = observables.photon_number(solution.u, solution.v, params.n0)
    series = {
        "abs_u": ("|u(t)|", np.abs(solution.u)),
        "v": ("v(t)", solution.v),
        "n": ("n(t)", n),
        "current": ("photon current", observables.photon_current(n, solution.grid.dt)),
    }
    label, y = series.get(focus, series["abs_u"])
    t = _display_times(solution.grid.times(), time_unit, params.xi0)
    xlabel = "t [1/xi0]" if time_unit == "inv_xi0" else "t [ns]"
    return svgplot.line_plot(
        path, t, [(f"eta={params.eta:g}", y)],
        xlabel=xlabel, ylabel=label,
        title=f"{label}  (omega_c={params.omega_c:g} ueV, T={params.temperature:g} K)",
    )


def write_sweep_svg(
    path, result: experiments.SweepResult, xi0: float, time_unit: str = "inv_xi0"
) -> str:
    t = _display_times(result.times, time_unit, xi0)
    xlabel = "t [1/xi0]" if time_unit == "inv_xi0" else "t [ns]"
    return svgplot.heatmap(
        path, t, result.eta_values, result.abs_u,
        xlabel=xlabel, ylabel="eta", title="|u(t)| over coupling", zlabel="|u|",
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _prepare(config: RunConfig):
    params = model_params(config)
    grid = time_grid(config)
    return params, grid, quadrature(config)


def cmd_simulate(config: RunConfig, svg: bool = False) -> int:
    params, grid, quad = _prepare(config)
    solution = volterra.solve(params, grid, quad=quad)
    os.makedirs(config.output_dir, exist_ok=True)
    path = write_trajectory_csv(
        os.path.join(config.output_dir, "trajectory.csv"),
        solution, params, config.time_unit,
    )
    print(f"wrote {path} ({grid.n_steps + 1} rows)")
    if svg:
        svg_path = write_trajectory_svg(
            os.path.join(config.output_dir, "trajectory.svg"),
            solution, params, "abs_u", config.time_unit,
        )
        print(f"wrote {svg_path}")
    return 0


def cmd_sweep(
    config: RunConfig,
    eta_min: float,
    eta_max: float,
    eta_step: float,
    svg: bool = False,
    parallel: bool = True,
) -> int:
    if eta_min > eta_max:
        raise ConfigurationError(f"empty eta range: {eta_min:g} > {eta_max:g}")
    if eta_step <= 0:
        raise ConfigurationError("eta_step must be positive")
    params, grid, quad = _prepare(config)
    n_pts = int(math.floor((eta_max - eta_min) / eta_step + 1e-9)) + 1
    etas = np.round(eta_min + eta_step * np.arange(n_pts), 12)
    result = experiments.sweep_eta(params, grid, etas, quad=quad, parallel=parallel)
    os.makedirs(config.output_dir, exist_ok=True)
    path = write_sweep_csv(
        os.path.join(config.output_dir, "sweep.csv"),
        result, config.xi0, config.time_unit,
    )
    steady_path = write_steady_csv(os.path.join(config.output_dir, "steady.csv"), result)
    print(f"wrote {path} ({len(etas)} eta points x {grid.n_steps + 1} times)")
    print(f"wrote {steady_path}")
    if svg:
        print(
            "wrote "
            + write_sweep_svg(
                os.path.join(config.output_dir, "sweep.svg"),
                result, config.xi0, config.time_unit,
            )
        )
    return 0


def cmd_rho(config: RunConfig, at_time: float, svg: bool = False) -> int:
    params, grid, quad = _prepare(config)
    if not 0.0 <= at_time <= config.t_max:
        raise ConfigurationError(
            f"at_time {at_time:g} outside the grid [0, {config.t_max:g}] "
            f"({config.time_unit})"
        )
    kernels = spectral.tabulate_kernels(params, grid, quad)
    u = volterra.solve_u(params, grid, kernels)
    v = volterra.compute_v(u, kernels, grid)
    j = int(round(_internal_time(at_time, config) / grid.dt))
    j = min(max(j, 0), grid.n_steps)
    alpha = complex(u[j]) * params.alpha0
    rho = observables.density_matrix(alpha, float(v[j]), config.n_max_fock)
    pur = observables.purity(rho)
    os.makedirs(config.output_dir, exist_ok=True)
    path = write_rho_csv(os.path.join(config.output_dir, "rho.csv"), rho, pur)
    print(
        f"wrote {path} (n_max={rho.n_max}, purity={pur:.6g}, "
        f"trunc_err={rho.truncation_error:.3g})"
    )
    if svg:
        dim = rho.n_max + 1
        svg_path = svgplot.heatmap(
            os.path.join(config.output_dir, "rho.svg"),
            np.arange(dim), np.arange(dim), np.abs(rho.elements),
            xlabel="q", ylabel="p", title="|rho_pq|", zlabel="|rho|",
        )
        print(f"wrote {svg_path}")
    return 0


def cmd_oracle_check(config: RunConfig) -> int:
    params, grid, quad = _prepare(config)
    spec = chain_oracle.ChainSpec(config.chain_sites)
    horizon = spec.t_valid(params.xi0)
    if horizon < grid.t_max:
        required = math.ceil(
            2.0 * params.xi0 * grid.t_max / chain_oracle.HORIZON_SAFETY
        )
        raise ConfigurationError(
            f"chain too short: validity horizon {horizon:g} < t_max {grid.t_max:g} "
            f"(internal units); need n_sites >= {required} "
            f"(= ceil(2*xi0*t_max/{chain_oracle.HORIZON_SAFETY:g}))"
        )

    kernels = spectral.tabulate_kernels(params, grid, quad)
    u = volterra.solve_u(params, grid, kernels)
    v = volterra.compute_v(u, kernels, grid)
    H = chain_oracle.build_hamiltonian(params, spec)
    times = grid.times()
    u_oracle = chain_oracle.propagator_table(H, times)
    v_oracle = chain_oracle.thermal_v_table(H, params, spec, times)

    du = float(np.max(np.abs(u - u_oracle)))
    dv = float(np.max(np.abs(v - v_oracle)))
    tol_u = 1e-3
    nbar = (
        spectral.bose_occupation(params.omega_c, params.temperature)
        if params.temperature > 0
        else 0.0
    )
    tol_v = 1e-2 * nbar
    ok_u = du <= tol_u
    ok_v = dv <= tol_v

    os.makedirs(config.output_dir, exist_ok=True)
    path = write_oracle_csv(
        os.path.join(config.output_dir, "oracle.csv"),
        _display_times(times, config, params.xi0), u, u_oracle, v, v_oracle,
    )
    print(f"oracle: n_sites={spec.n_sites}, horizon={horizon:g}, t_max={grid.t_max:g}")
    print(f"u: max|u - u_oracle| = {du:.3e} (tol {tol_u:.1e}) {'PASS' if ok_u else 'FAIL'}")
    print(f"v: max|v - v_oracle| = {dv:.3e} (tol {tol_v:.3e}) {'PASS' if ok_v else 'FAIL'}")
    print(f"wrote {path}")
    return 0 if (ok_u and ok_v) else 2


_SCENARIO_OVERRIDE_FIELDS = ("omega0", "xi0", "omega_c", "eta", "n0")


def cmd_scenario(
    config: RunConfig,
    name: str,
    args: argparse.Namespace,
    svg: bool = False,
    parallel: bool = True,
) -> int:
    overrides = {}
    for field_name in _SCENARIO_OVERRIDE_FIELDS:
        val = getattr(args, field_name, None)
        if val is not None:
            overrides[field_name] = val
    if getattr(args, "temperature_K", None) is not None:
        overrides["temperature"] = args.temperature_K
    if getattr(args, "alpha0_re", None) is not None or getattr(args, "alpha0_im", None) is not None:
        overrides["alpha0"] = complex(
            args.alpha0_re if args.alpha0_re is not None else 0.0,
            args.alpha0_im if args.alpha0_im is not None else 0.0,
        )
    if getattr(args, "n_steps", None) is not None:
        overrides["n_steps"] = args.n_steps
    if getattr(args, "t_max", None) is not None:
        xi0 = overrides.get("xi0", config.xi0)
        overrides["t_max_xi0"] = _internal_time(args.t_max, config) * xi0
    written = experiments.run_scenario(
        name,
        output_dir=config.output_dir,
        overrides=overrides or None,
        svg=svg,
        parallel=parallel,
        quad=quadrature(config),
    )
    for path in written:
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = resolve_config(args)
        if args.command == "simulate":
            return cmd_simulate(config, svg=args.svg)
        if args.command == "sweep":
            return cmd_sweep(
                config, args.eta_min, args.eta_max, args.eta_step,
                svg=args.svg, parallel=not args.serial,
            )
        if args.command == "rho":
            return cmd_rho(config, args.at_time, svg=args.svg)
        if args.command == "oracle-check":
            return cmd_oracle_check(config)
        if args.command == "scenario":
            return cmd_scenario(
                config, args.name, args, svg=args.svg, parallel=not args.serial
            )
        raise ConfigurationError(f"unknown command {args.command!r}")
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
