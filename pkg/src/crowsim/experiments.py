"""Named paper-figure presets and the coupling-strength sweep.

Presets pin the parameter sets behind each figure: detuning series (fig2a–c),
the η–t amplitude surface (fig3_sweep), thermal fluctuations at 5 mK / 5 K
(fig4a–b), and photon number / outflow current with one initial photon
(fig5a–d). All share the paper grid t_max = 60/ξ₀ with dt = 0.01/ξ₀ and the
coupling set {0.3, 0.5, 0.7, 1.0, 1.5, 2.0} unless overridden. Everything
here is deterministic; parallelism only distributes independent η points.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import spectral, volterra
from .errors import ConfigurationError, NumericalError
from .model import ModelParams, TimeGrid, grid_from_xi0_units
from .spectral import QuadratureSpec
from .volterra import TrajectorySolution

PRESET_NAMES = (
    "fig2a", "fig2b", "fig2c", "fig3_sweep",
    "fig4a", "fig4b", "fig5a", "fig5b", "fig5c", "fig5d",
)

#: Coupling values shown in the multi-curve figures.
FIGURE_ETAS = (0.3, 0.5, 0.7, 1.0, 1.5, 2.0)

_T_COLD = 0.005  # 5 mK
_T_WARM = 5.0  # 5 K

_DEF_T_MAX_XI0 = 60.0
_DEF_N_STEPS = 6000


@dataclass(frozen=True)
class DatasetSpec:
    """One output dataset of a scenario: what it is and where it lands."""

    kind: str  # "trajectory" | "sweep" | "steady"
    relpath: str
    eta: float | None = None
    focus: str = "abs_u"  # column highlighted in the derived SVG


@dataclass
class Scenario:
    name: str
    params: ModelParams
    grid: TimeGrid
    outputs: tuple[DatasetSpec, ...]


# name -> (omega_c factor, temperature, alpha0, n0, focus column)
_TRAJECTORY_PRESETS = {
    "fig2a": (0.5, 0.0, 1.0 + 0.0j, 1.0, "abs_u"),
    "fig2b": (1.025, 0.0, 1.0 + 0.0j, 1.0, "abs_u"),
    "fig2c": (1.0, 0.0, 1.0 + 0.0j, 1.0, "abs_u"),
    "fig4a": (1.0, _T_COLD, 0.0j, 0.0, "v"),
    "fig4b": (1.0, _T_WARM, 0.0j, 0.0, "v"),
    "fig5a": (1.0, _T_COLD, 1.0 + 0.0j, 1.0, "n"),
    "fig5b": (1.0, _T_WARM, 1.0 + 0.0j, 1.0, "n"),
    "fig5c": (1.0, _T_COLD, 1.0 + 0.0j, 1.0, "current"),
    "fig5d": (1.0, _T_WARM, 1.0 + 0.0j, 1.0, "current"),
}

_OVERRIDE_KEYS = {
    "omega0", "xi0", "omega_c", "eta", "temperature", "alpha0", "n0",
    "t_max_xi0", "n_steps",
}


def sweep_eta_values() -> np.ndarray:
    """The fig3 coupling grid: 0.1 .. 2.0 in steps of 0.1."""
    return np.round(np.arange(1, 21) * 0.1, 10)


def build_scenario(name: str, overrides: dict | None = None) -> Scenario:
    """Resolve a preset name (plus optional parameter overrides) to a Scenario."""
    if name not in PRESET_NAMES:
        raise ConfigurationError(
            f"unknown preset {name!r}; choose one of {', '.join(PRESET_NAMES)}"
        )
    overrides = dict(overrides or {})
    unknown = set(overrides) - _OVERRIDE_KEYS
    if unknown:
        raise ConfigurationError(f"unknown override keys: {sorted(unknown)}")

    t_max_xi0 = float(overrides.pop("t_max_xi0", _DEF_T_MAX_XI0))
    n_steps = int(overrides.pop("n_steps", _DEF_N_STEPS))
    eta_override = overrides.pop("eta", None)

    base = ModelParams(alpha0=0.0j, n0=0.0)
    if name == "fig3_sweep":
        base = replace(base, omega_c=base.omega0, temperature=0.0)
    else:
        omc_factor, temp, alpha0, n0, _focus = _TRAJECTORY_PRESETS[name]
        base = replace(
            base,
            omega_c=omc_factor * base.omega0,
            temperature=temp,
            alpha0=alpha0,
            n0=n0,
        )
    if overrides:
        base = replace(base, **overrides)
    grid = grid_from_xi0_units(t_max_xi0, n_steps, base.xi0)

    if name == "fig3_sweep":
        outputs = (
            DatasetSpec(kind="sweep", relpath="sweep.csv"),
            DatasetSpec(kind="steady", relpath="steady.csv"),
        )
        if eta_override is not None:
            base = replace(base, eta=float(eta_override))
        return Scenario(name=name, params=base, grid=grid, outputs=outputs)

    focus = _TRAJECTORY_PRESETS[name][4]
    etas = (
        (float(eta_override),) if eta_override is not None else FIGURE_ETAS
    )
    outputs = tuple(
        DatasetSpec(
            kind="trajectory",
            relpath=f"eta_{eta:g}/trajectory.csv",
            eta=eta,
            focus=focus,
        )
        for eta in etas
    )
    return Scenario(
        name=name, params=replace(base, eta=etas[0]), grid=grid, outputs=outputs
    )


def _solve_point(args) -> TrajectorySolution:
    params, grid, nodes, rel_tol = args
    return volterra.solve(params, grid, quad=QuadratureSpec(nodes, rel_tol))


def _solve_abs_u(args) -> np.ndarray:
    params, grid, nodes, rel_tol = args
    quad = QuadratureSpec(nodes, rel_tol)
    kernels = spectral.tabulate_kernels(params, grid, quad)
    return np.abs(volterra.solve_u(params, grid, kernels))


def _run_points(worker, argsets, labels, parallel: bool):
    """Map worker over argsets, naming the failing η on error."""
    results = [None] * len(argsets)
    n_workers = min(len(argsets), os.cpu_count() or 1)
    if parallel and n_workers > 1 and len(argsets) > 2:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            futures = [pool.submit(worker, a) for a in argsets]
            for i, fut in enumerate(futures):
                try:
                    results[i] = fut.result()
                except Exception as exc:
                    _reraise_with_point(exc, labels[i])
    else:
        for i, args in enumerate(argsets):
            try:
                results[i] = worker(args)
            except Exception as exc:
                _reraise_with_point(exc, labels[i])
    return results


def _reraise_with_point(exc: Exception, eta: float):
    message = f"eta={eta:g}: {exc}"
    if isinstance(exc, ConfigurationError):
        raise ConfigurationError(message) from exc
    raise NumericalError(message) from exc


@dataclass
class SweepResult:
    """|u| surface over (η, t) plus the per-η steady amplitudes."""

    eta_values: np.ndarray
    times: np.ndarray
    abs_u: np.ndarray  # shape (len(eta_values), len(times))
    steady: np.ndarray


def sweep_eta(
    params_base: ModelParams,
    grid: TimeGrid,
    eta_values,
    quad: QuadratureSpec | None = None,
    parallel: bool = True,
    tail_fraction: float = 0.25,
) -> SweepResult:
    """Solve |u(t)| for each coupling in ascending ``eta_values``."""
    etas = np.asarray(list(eta_values), dtype=float)
    if len(etas) == 0:
        raise ConfigurationError("eta_values must be nonempty")
    if np.any(np.diff(etas) < 0):
        raise ConfigurationError("eta_values must be ascending")
    quad = quad or QuadratureSpec()
    argsets = [
        (replace(params_base, eta=float(eta)), grid, quad.nodes, quad.rel_tol)
        for eta in etas
    ]
    rows = _run_points(_solve_abs_u, argsets, etas, parallel)
    abs_u = np.vstack(rows)
    steady = np.array(
        [volterra.steady_amplitude(row, tail_fraction) for row in abs_u]
    )
    return SweepResult(
        eta_values=etas, times=grid.times(), abs_u=abs_u, steady=steady
    )


def run_scenario(
    name: str,
    output_dir: str = ".",
    overrides: dict | None = None,
    svg: bool = False,
    parallel: bool = True,
    quad: QuadratureSpec | None = None,
):
    """Execute a preset and write its datasets under ``output_dir/<name>/``.

    Returns the list of written file paths. File schemas live in
    :mod:`crowsim.cli` (the same writers the subcommands use).
    """
    from . import cli  # deferred: cli imports this module at load time

    scenario = build_scenario(name, overrides)
    quad = quad or QuadratureSpec()
    base = os.path.join(output_dir, scenario.name)
    written = []

    if scenario.name == "fig3_sweep":
        etas = (
            np.asarray([scenario.params.eta])
            if overrides and "eta" in overrides
            else sweep_eta_values()
        )
        result = sweep_eta(
            scenario.params, scenario.grid, etas, quad=quad, parallel=parallel
        )
        os.makedirs(base, exist_ok=True)
        written.append(
            cli.write_sweep_csv(
                os.path.join(base, "sweep.csv"), result, scenario.params.xi0
            )
        )
        written.append(
            cli.write_steady_csv(os.path.join(base, "steady.csv"), result)
        )
        if svg:
            written.append(
                cli.write_sweep_svg(
                    os.path.join(base, "sweep.svg"), result, scenario.params.xi0
                )
            )
        return written

    argsets = [
        (replace(scenario.params, eta=spec.eta), scenario.grid, quad.nodes, quad.rel_tol)
        for spec in scenario.outputs
    ]
    labels = [spec.eta for spec in scenario.outputs]
    solutions = _run_points(_solve_point, argsets, labels, parallel)
    for spec, solution, args in zip(scenario.outputs, solutions, argsets):
        path = os.path.join(base, spec.relpath)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        written.append(cli.write_trajectory_csv(path, solution, args[0]))
        if svg:
            svg_path = path[: -len(".csv")] + ".svg"
            written.append(
                cli.write_trajectory_svg(svg_path, solution, args[0], spec.focus)
            )
    return written
