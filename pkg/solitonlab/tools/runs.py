import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from solitonlab.config import EnvConfig, load_config
from solitonlab.core.errors import SolitonLabError
from solitonlab.core.gaussians import evaluate
from solitonlab.core.grid import (
    GridTrajectory,
    evolve_grid,
    grid_energy,
    grid_norm,
    grid_soliton_observables,
)
from solitonlab.core.hamiltonian import Q_MIN, hamiltonian_scan, harmonic_frequency, potential
from solitonlab.core.scenarios import build_initial_states, collision_regime, compare
from solitonlab.core.schemas import Command, RunConfig, Scenario
from solitonlab.core.stationary import stationary_state
from solitonlab.core.variational import VariationalTrajectory, evolve, extract_observables
from solitonlab.infra.logging import log_event
from solitonlab.infra.storage import (
    COMPARE_SNAPSHOT_HEADER,
    HAMILTONIAN_HEADER,
    SNAPSHOT_HEADER,
    ensure_dir,
    observables_header,
    snapshot_rows,
    write_csv,
    write_summary,
)
from solitonlab.tools.scenario_config import load_config_file, parse_config

SummaryItems = List[Tuple[str, Any]]


def assert_no_duplicate_subcommands(subparsers) -> None:
    choices = getattr(subparsers, "choices", {}) or {}
    names = list(choices.keys())
    if len(names) != len(set(names)):
        raise SystemExit(f"Duplicate subcommand names detected: {names}")


def build_parser() -> argparse.ArgumentParser:
    """
    Reason:
    - Every subcommand takes the same --config / --out / --override trio.

    Benefit:
    - Adding a command means one entry in the help table and one runner.
    """
    parser = argparse.ArgumentParser(prog="solitonlab")
    sub = parser.add_subparsers(dest="cmd", required=True)

    helps = {
        Command.GROUND_STATE: "Stationary N_g-Gaussian ground state",
        Command.EVOLVE_VAR: "Evolve a scenario with the variational engine",
        Command.EVOLVE_GRID: "Evolve a scenario on the lattice",
        Command.COMPARE: "Run both engines and compare densities on the schedule",
        Command.HAMILTONIAN_SCAN: "Tabulate the single-Gaussian Hamiltonian H(q, p)",
    }
    for command, text in helps.items():
        p = sub.add_parser(command.value, help=text)
        p.add_argument("--config", type=str, default="", help="Scenario file (optional for ground-state and hamiltonian-scan)")
        p.add_argument("--out", type=str, default="out", help="Output directory")
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="Override a scenario key; soliton.<i>.<key> addresses one soliton",
        )

    assert_no_duplicate_subcommands(sub)
    return parser


# ----------------------------
# Engines
# ----------------------------

def _timed(fn: Callable[..., Any], *args: Any, **kwargs: Any) -> Tuple[Any, float]:
    start = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, time.perf_counter() - start


def _lattice(scenario: Scenario, stride: int) -> np.ndarray:
    d = scenario.domain
    return (d.x_min + d.dx * np.arange(d.n_points))[::stride]


def _relative(a: float, b: float) -> float:
    return abs(b - a) / abs(a) if a else abs(b - a)


def _evolve_variational(scenario: Scenario) -> Tuple[VariationalTrajectory, float]:
    initial = build_initial_states(scenario)
    return _timed(
        evolve,
        initial.variational,
        scenario.t_end,
        scenario.tolerance,
        times=scenario.schedule,
        grouping=initial.grouping,
    )


def _evolve_lattice(scenario: Scenario, env: EnvConfig) -> Tuple[GridTrajectory, float]:
    initial = build_initial_states(scenario)
    return _timed(
        evolve_grid,
        initial.grid,
        scenario.t_end,
        scenario.grid,
        times=scenario.schedule,
        progress=env.progress,
    )


# ----------------------------
# Commands
# ----------------------------

def _run_ground_state(config: RunConfig, scenario: Scenario, env: EnvConfig, out: Path) -> Tuple[SummaryItems, SummaryItems]:
    result, seconds = _timed(stationary_state, config.n_gaussians)
    psi = result.state.psi
    x = _lattice(scenario, config.snapshot_stride)

    write_csv(out / "snapshots.csv", SNAPSHOT_HEADER, snapshot_rows(0.0, x, evaluate(psi, x)))

    obs = extract_observables(result.state)
    write_csv(
        out / "observables.csv",
        observables_header(1),
        [[0.0, obs.norm, obs.energy, int(result.regularized), obs.positions[0], obs.momenta[0]]],
    )

    summary: SummaryItems = [("command", config.command.value), ("n_gaussians", config.n_gaussians)]
    summary += [(f"alpha_{i}", a) for i, a in enumerate(result.widths, start=1)]
    summary += [(f"gamma_{i}", g) for i, g in enumerate(result.weights, start=1)]
    summary += [
        ("mu", result.mu),
        ("energy", result.energy),
        ("delta_E", result.delta_energy),
        ("norm", obs.norm),
        ("residual", result.residual),
        ("iterations", result.iterations),
        ("regularized", result.regularized),
    ]
    return summary, [("variational_seconds", seconds)]


def _scenario_summary(config: RunConfig, scenario: Scenario) -> SummaryItems:
    items: SummaryItems = [
        ("command", config.command.value),
        ("solitons", len(scenario.solitons)),
        ("total_gaussians", scenario.total_gaussians),
        ("t_end", scenario.t_end),
    ]
    items += [(f"regime_{i}", collision_regime(s.p)) for i, s in enumerate(scenario.solitons, start=1)]
    return items


def _variational_row(record) -> List[Any]:
    row: List[Any] = [record.time, record.norm, record.energy, record.regularized_count]
    for x_i, p_i in zip(record.positions, record.momenta):
        row += [x_i, p_i]
    return row


def _run_evolve_var(config: RunConfig, scenario: Scenario, env: EnvConfig, out: Path) -> Tuple[SummaryItems, SummaryItems]:
    traj, seconds = _evolve_variational(scenario)
    x = _lattice(scenario, config.snapshot_stride)

    def rows():
        for state in traj.states:
            yield from snapshot_rows(state.time, x, evaluate(state.psi, x))

    write_csv(out / "snapshots.csv", SNAPSHOT_HEADER, rows())
    write_csv(
        out / "observables.csv",
        observables_header(len(scenario.solitons)),
        [_variational_row(r) for r in traj.records],
    )

    first, last = traj.records[0], traj.records[-1]
    summary = _scenario_summary(config, scenario) + [
        ("norm_initial", first.norm),
        ("norm_final", last.norm),
        ("norm_drift", _relative(first.norm, last.norm)),
        ("energy_initial", first.energy),
        ("energy_final", last.energy),
        ("energy_drift", _relative(first.energy, last.energy)),
        ("regularized_count", traj.regularized_count),
        ("evaluations", traj.evaluations),
    ]
    return summary, [("variational_seconds", seconds)]


def _grid_row(state, n_solitons: int, interaction: float) -> List[Any]:
    positions, momenta = grid_soliton_observables(state, n_solitons)
    row: List[Any] = [state.time, grid_norm(state), grid_energy(state, interaction), 0]
    for x_i, p_i in zip(positions, momenta):
        row += [x_i, p_i]
    return row


def _run_evolve_grid(config: RunConfig, scenario: Scenario, env: EnvConfig, out: Path) -> Tuple[SummaryItems, SummaryItems]:
    traj, seconds = _evolve_lattice(scenario, env)
    stride = config.snapshot_stride

    def rows():
        for state in traj.states:
            yield from snapshot_rows(state.time, state.x[::stride], state.amplitudes[::stride])

    write_csv(out / "snapshots.csv", SNAPSHOT_HEADER, rows())
    n = len(scenario.solitons)
    write_csv(
        out / "observables.csv",
        observables_header(n),
        [_grid_row(s, n, scenario.grid.interaction) for s in traj.states],
    )

    first, last = traj.monitor[0], traj.monitor[-1]
    summary = _scenario_summary(config, scenario) + [
        ("scheme", scenario.grid.scheme.value),
        ("dx", scenario.domain.dx),
        ("dt", scenario.grid.dt),
        ("steps", traj.steps),
        ("norm_initial", first.norm),
        ("norm_final", last.norm),
        ("norm_drift", _relative(first.norm, last.norm)),
        ("energy_initial", first.energy),
        ("energy_final", last.energy),
        ("energy_drift", _relative(first.energy, last.energy)),
        ("boundary_max", max(m.boundary for m in traj.monitor)),
    ]
    return summary, [("grid_seconds", seconds)]


def _run_compare(config: RunConfig, scenario: Scenario, env: EnvConfig, out: Path) -> Tuple[SummaryItems, SummaryItems]:
    with ThreadPoolExecutor(max_workers=env.threads) as pool:
        var_future = pool.submit(_evolve_variational, scenario)
        grid_future = pool.submit(_evolve_lattice, scenario, env)
        var_traj, var_seconds = var_future.result()
        grid_traj, grid_seconds = grid_future.result()

    interaction = scenario.grid.interaction
    metrics = compare(var_traj, grid_traj, scenario.schedule, interaction)
    stride = config.snapshot_stride
    n = len(scenario.solitons)

    def rows():
        for t in scenario.schedule:
            grid_state = grid_traj.state_at(t)
            x = grid_state.x[::stride]
            yield from snapshot_rows(
                t, x, evaluate(var_traj.state_at(t).psi, x), grid_state.amplitudes[::stride]
            )

    write_csv(out / "snapshots.csv", COMPARE_SNAPSHOT_HEADER, rows())

    obs_rows = []
    for record, metric in zip(var_traj.records, metrics):
        grid_row = _grid_row(grid_traj.state_at(record.time), n, interaction)
        obs_rows.append(
            _variational_row(record) + grid_row[1:3] + grid_row[4:] + [metric.l2_density_mismatch, metric.sup_mismatch]
        )
    write_csv(out / "observables.csv", observables_header(n, compare=True), obs_rows)

    first, last = metrics[0], metrics[-1]
    summary = _scenario_summary(config, scenario) + [
        ("energy_variational_initial", first.energy_variational),
        ("energy_grid_initial", first.energy_grid),
        ("energy_gap_initial", first.energy_variational - first.energy_grid),
        ("energy_variational_final", last.energy_variational),
        ("energy_grid_final", last.energy_grid),
        ("norm_variational_final", last.norm_variational),
        ("norm_grid_final", last.norm_grid),
        ("l2_mismatch_max", max(m.l2_density_mismatch for m in metrics)),
        ("sup_mismatch_max", max(m.sup_mismatch for m in metrics)),
        ("regularized_count", var_traj.regularized_count),
    ]
    timing = [
        ("variational_seconds", var_seconds),
        ("grid_seconds", grid_seconds),
        ("grid_to_variational_ratio", grid_seconds / var_seconds if var_seconds > 0 else float("inf")),
    ]
    return summary, timing


def _run_hamiltonian_scan(config: RunConfig, scenario: Scenario, env: EnvConfig, out: Path) -> Tuple[SummaryItems, SummaryItems]:
    points, seconds = _timed(hamiltonian_scan, config.q_min, config.q_max, config.q_points, config.p_scan)
    write_csv(out / "hamiltonian.csv", HAMILTONIAN_HEADER, [[pt.q, pt.p, pt.T, pt.V, pt.H] for pt in points])

    lowest = min(points, key=lambda pt: pt.V)
    omega = harmonic_frequency()
    summary: SummaryItems = [
        ("command", config.command.value),
        ("q_min", config.q_min),
        ("q_max", config.q_max),
        ("q_points", config.q_points),
        ("p", config.p_scan),
        ("q_at_V_min_scan", lowest.q),
        ("V_min_scan", lowest.V),
        ("q_at_V_min", Q_MIN),
        ("V_min", potential(Q_MIN)),
        ("harmonic_frequency", omega),
        ("oscillation_period", 2.0 * np.pi / omega),
    ]
    return summary, [("scan_seconds", seconds)]


RUNNERS: Dict[Command, Callable[[RunConfig, Scenario, EnvConfig, Path], Tuple[SummaryItems, SummaryItems]]] = {
    Command.GROUND_STATE: _run_ground_state,
    Command.EVOLVE_VAR: _run_evolve_var,
    Command.EVOLVE_GRID: _run_evolve_grid,
    Command.COMPARE: _run_compare,
    Command.HAMILTONIAN_SCAN: _run_hamiltonian_scan,
}


def run(config: RunConfig, scenario: Scenario, env: Optional[EnvConfig] = None) -> Dict[str, Any]:
    """
    Execute one command and write its result files; returns the summary items.

    Reason:
    - Tests and the CLI need the same run path without going through argv.

    Benefit:
    - Summary items come back as a dict, so callers can assert on them directly.
    """
    env = env or load_config()
    out = ensure_dir(config.out_dir)
    log_event("run_start", command=config.command.value, out=str(out), config=str(config.config_path or ""))

    summary, timing = RUNNERS[config.command](config, scenario, env, out)
    write_summary(out / "summary.txt", summary)
    write_summary(out / "timing.txt", timing)

    log_event("run_done", command=config.command.value, out=str(out), **dict(timing))
    return dict(summary)


# ----------------------------
# Entry
# ----------------------------

def load_run_config(
    command: str, config: str = "", out: str = "out", overrides: Sequence[str] = ()
) -> Tuple[RunConfig, Scenario]:
    if config:
        return load_config_file(Path(config), command=command, out_dir=Path(out), overrides=overrides)
    return parse_config("", command=command, out_dir=Path(out), overrides=overrides)


def dispatch(args) -> int:
    """
    Reason:
    - Library errors carry their own exit code; tracebacks are for real bugs.

    Benefit:
    - Scripts can branch on the exit status of a failed run.
    """
    try:
        run_config, scenario = load_run_config(args.cmd, args.config, args.out, args.override)
        run(run_config, scenario)
    except SolitonLabError as e:
        log_event("run_failed", command=args.cmd, error_type=type(e).__name__, error=str(e), exit_code=e.exit_code)
        print(f"solitonlab: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        log_event("run_failed", command=args.cmd, error_type=type(e).__name__, error=str(e), exit_code=1)
        print(f"solitonlab: unexpected {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    raise SystemExit(dispatch(args))


if __name__ == "__main__":
    main()
