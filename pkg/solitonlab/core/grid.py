"""
Lattice engine for i psi_t = -psi_xx - |psi|^2 psi.

Sites x_j = x_min + j dx carry psi_j; the Laplacian is the three-point central
difference with zero amplitude outside the lattice (Dirichlet). Two explicit
steppers are available: first-order Euler, psi <- psi + dt F(psi), and classic
RK4. The run is guarded by a norm-drift monitor and a boundary-leak monitor.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import trapezoid
from scipy.signal import find_peaks
from tqdm import tqdm

from solitonlab.core.errors import BoundaryLeakError, ConfigValidationError, NormDriftError, ScheduleError
from solitonlab.core.schemas import GridDomain, GridSettings, Scheme
from solitonlab.infra.logging import log_event


# ----------------------------
# State
# ----------------------------

@dataclass(frozen=True)
class GridState:
    x_min: float
    dx: float
    amplitudes: NDArray[np.complex128]
    time: float = 0.0

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 3:
            raise ValueError("a lattice state needs a 1-d array of at least 3 amplitudes")
        if not self.dx > 0.0:
            raise ValueError("dx must be positive")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_points(self) -> int:
        return int(self.amplitudes.size)

    @property
    def x(self) -> NDArray[np.float64]:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def density(self) -> NDArray[np.float64]:
        return np.abs(self.amplitudes) ** 2

    def with_amplitudes(self, amplitudes: ArrayLike, time: float) -> "GridState":
        return GridState(x_min=self.x_min, dx=self.dx, amplitudes=amplitudes, time=time)


def sample_grid(
    domain: GridDomain, fn: Callable[[NDArray[np.float64]], ArrayLike], time: float = 0.0
) -> GridState:
    """Lattice state with psi_j = fn(x_j)."""
    x = domain.x_min + domain.dx * np.arange(domain.n_points)
    return GridState(x_min=domain.x_min, dx=domain.dx, amplitudes=np.asarray(fn(x), dtype=complex), time=time)


@dataclass(frozen=True)
class GridMonitorRecord:
    time: float
    step: int
    norm: float
    energy: float
    boundary: float


@dataclass(frozen=True)
class GridTrajectory:
    states: Tuple[GridState, ...]
    monitor: Tuple[GridMonitorRecord, ...] = field(default=())
    steps: int = 0

    def state_at(self, t: float, atol: float = 1e-9) -> GridState:
        for state in self.states:
            if abs(state.time - t) <= atol:
                return state
        raise ScheduleError(f"t={t} is not an output time of this lattice trajectory")


# ----------------------------
# Stencils and steppers
# ----------------------------

def stability_bound(dx: float, scheme: Scheme = Scheme.EULER) -> float:
    """
    Largest time step accepted for spacing dx.

    Euler: dx^2/8. RK4: omega_max dt < 2 sqrt(2) on the imaginary axis with
    omega_max = 4/dx^2, i.e. dt < dx^2/sqrt(2).
    """
    if scheme is Scheme.RK4:
        return dx * dx / math.sqrt(2.0)
    return dx * dx / 8.0


def discrete_laplacian(state: GridState, j: int) -> complex:
    """(psi_{j-1} + psi_{j+1} - 2 psi_j) / dx^2 with zero outside the lattice."""
    if not 0 <= j < state.n_points:
        raise IndexError(f"site {j} outside 0..{state.n_points - 1}")
    psi = state.amplitudes
    left = psi[j - 1] if j > 0 else 0j
    right = psi[j + 1] if j < state.n_points - 1 else 0j
    return complex((left + right - 2.0 * psi[j]) / (state.dx * state.dx))


def laplacian(psi: NDArray[np.complex128], dx: float) -> NDArray[np.complex128]:
    out = -2.0 * psi
    out[1:] += psi[:-1]
    out[:-1] += psi[1:]
    return out / (dx * dx)


def _rhs(psi: NDArray[np.complex128], dx: float, interaction: float) -> NDArray[np.complex128]:
    return 1j * (laplacian(psi, dx) + interaction * (np.abs(psi) ** 2) * psi)


def euler_step(state: GridState, dt: float, interaction: float = 1.0) -> GridState:
    psi = state.amplitudes
    return state.with_amplitudes(psi + dt * _rhs(psi, state.dx, interaction), state.time + dt)


def rk4_step(state: GridState, dt: float, interaction: float = 1.0) -> GridState:
    psi, dx = state.amplitudes, state.dx
    k1 = _rhs(psi, dx, interaction)
    k2 = _rhs(psi + 0.5 * dt * k1, dx, interaction)
    k3 = _rhs(psi + 0.5 * dt * k2, dx, interaction)
    k4 = _rhs(psi + dt * k3, dx, interaction)
    return state.with_amplitudes(psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), state.time + dt)


STEPPERS = {Scheme.EULER: euler_step, Scheme.RK4: rk4_step}


# ----------------------------
# Observables
# ----------------------------

def grid_norm(state: GridState) -> float:
    return float(trapezoid(state.density, dx=state.dx))


def grid_kinetic(state: GridState) -> float:
    """Sum over links of |forward difference|^2 dx, boundary links included."""
    d = np.diff(np.pad(state.amplitudes, 1)) / state.dx
    return float(state.dx * np.sum(np.abs(d) ** 2))


def grid_energy(state: GridState, interaction: float = 1.0) -> float:
    quartic = float(trapezoid(state.density**2, dx=state.dx))
    return grid_kinetic(state) - 0.5 * interaction * quartic


def boundary_amplitude(state: GridState) -> float:
    psi = state.amplitudes
    return float(max(abs(psi[0]), abs(psi[-1])))


def _regions(density: NDArray[np.float64], n_solitons: int) -> List[slice]:
    if n_solitons == 1:
        return [slice(0, density.size)]

    peaks, props = find_peaks(density, height=0.0)
    if peaks.size >= n_solitons:
        strongest = np.sort(peaks[np.argsort(props["peak_heights"])[::-1][:n_solitons]])
        cuts = [(int(a) + int(b)) // 2 for a, b in zip(strongest, strongest[1:])]
    else:
        # merged: split at equal shares of the mass
        cumulative = np.cumsum(density)
        targets = cumulative[-1] * np.arange(1, n_solitons) / n_solitons
        cuts = [int(i) for i in np.searchsorted(cumulative, targets)]
    edges = [0] + cuts + [density.size]
    return [slice(a, b) for a, b in zip(edges, edges[1:])]


def grid_soliton_observables(state: GridState, n_solitons: int) -> Tuple[List[float], List[float]]:
    """
    Position and momentum per soliton, ordered left to right.

    The lattice is split at the midpoints between the n strongest density peaks;
    each region reports <x> and <p> = Im(conj(psi) psi') over its own mass.
    """
    if n_solitons < 1:
        raise ValueError("n_solitons must be at least 1")
    psi = state.amplitudes
    density = state.density
    current = np.imag(np.conj(psi) * np.gradient(psi, state.dx))
    x = state.x

    positions: List[float] = []
    momenta: List[float] = []
    for region in _regions(density, n_solitons):
        mass = float(density[region].sum())
        if mass > 0.0:
            positions.append(float(np.dot(x[region], density[region]) / mass))
            momenta.append(float(current[region].sum() / mass))
        else:
            positions.append(float("nan"))
            momenta.append(float("nan"))
    return positions, momenta


# ----------------------------
# Evolution
# ----------------------------

def _monitor(state: GridState, step: int, norm0: float, settings: GridSettings) -> GridMonitorRecord:
    record = GridMonitorRecord(
        time=state.time,
        step=step,
        norm=grid_norm(state),
        energy=grid_energy(state, settings.interaction),
        boundary=boundary_amplitude(state),
    )
    log_event(
        "grid_evolve_monitor",
        t=record.time,
        step=step,
        norm=record.norm,
        energy=record.energy,
        boundary=record.boundary,
    )
    drift = abs(record.norm - norm0) / norm0
    if not drift <= settings.norm_drift_bound:
        raise NormDriftError(time=record.time, drift=drift, bound=settings.norm_drift_bound)
    if not record.boundary <= settings.boundary_tolerance:
        raise BoundaryLeakError(time=record.time, amplitude=record.boundary, bound=settings.boundary_tolerance)
    return record


def evolve_grid(
    state: GridState,
    t_end: float,
    settings: GridSettings,
    *,
    times: Optional[Sequence[float]] = None,
    progress: bool = False,
) -> GridTrajectory:
    """
    Step from state.time to t_end and keep the states at `times` (default t_end).

    Each interval between output times is cut into equal steps no longer than
    settings.dt, so every output time is hit exactly.
    """
    if not t_end > state.time:
        raise ScheduleError(f"t_end={t_end} must be later than the state time {state.time}")
    bound = stability_bound(state.dx, settings.scheme)
    if settings.dt > bound:
        raise ConfigValidationError(
            f"{settings.scheme.value} step {settings.dt:g} exceeds the stability bound {bound:g} for dx={state.dx:g}",
            key="dt",
        )

    output_times = sorted(float(t) for t in (times if times is not None else [t_end]))
    if output_times and (output_times[0] < state.time - 1e-12 or output_times[-1] > t_end + 1e-12):
        raise ScheduleError(f"output times must lie in [{state.time}, {t_end}]")
    marks = [t for t in output_times if t > state.time]
    if not marks or marks[-1] < t_end:
        marks.append(t_end)

    step_fn = STEPPERS[settings.scheme]
    norm0 = grid_norm(state)
    if not norm0 > 0.0:
        raise ValueError("cannot evolve an empty lattice state")

    intervals = []
    t_prev = state.time
    for t_mark in marks:
        n_steps = max(1, math.ceil((t_mark - t_prev) / settings.dt - 1e-9))
        intervals.append((t_prev, t_mark, n_steps))
        t_prev = t_mark
    total_steps = sum(n for _, _, n in intervals)

    log_event(
        "grid_evolve_start",
        t0=state.time,
        t_end=t_end,
        scheme=settings.scheme.value,
        dt=settings.dt,
        dx=state.dx,
        n_points=state.n_points,
        steps=total_steps,
    )

    wanted = set(output_times)
    states: List[GridState] = [state] if state.time in wanted else []
    monitor: List[GridMonitorRecord] = [_monitor(state, 0, norm0, settings)]

    step = 0
    current = state
    with tqdm(total=total_steps, disable=not progress, file=sys.stderr, desc="grid", leave=False) as bar:
        for t_start, t_stop, n_steps in intervals:
            h = (t_stop - t_start) / n_steps
            for i in range(1, n_steps + 1):
                current = step_fn(current, h, settings.interaction)
                step += 1
                # exact grid times, no accumulated rounding
                current = current.with_amplitudes(current.amplitudes, t_start + i * h if i < n_steps else t_stop)
                if step % settings.norm_monitor_interval == 0:
                    monitor.append(_monitor(current, step, norm0, settings))
                bar.update(1)
            if monitor[-1].step != step:
                monitor.append(_monitor(current, step, norm0, settings))
            if t_stop in wanted:
                states.append(current)

    log_event("grid_evolve_done", t=current.time, steps=step, norm=monitor[-1].norm, energy=monitor[-1].energy)
    return GridTrajectory(states=tuple(states), monitor=tuple(monitor), steps=step)
