"""
Soliton scenarios for both engines and the metrics that compare them.

A soliton at rest is psi(x, t) = b / cosh(a x) exp(-i mu t) with a^2 = -mu,
b^2 = -2 mu; unit norm fixes mu = -1/16. Moving solitons are its Galilean
boosts, sqrt(1/8) exp(i p (x - x0) + i phi) / cosh((x - x0) / 4).
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import trapezoid

from solitonlab.core.errors import DomainError, OverlapError
from solitonlab.core.gaussians import GaussianSum, concatenate, energy, evaluate, norm_squared
from solitonlab.core.grid import GridState, GridTrajectory, grid_energy, grid_norm, sample_grid
from solitonlab.core.schemas import ComparisonMetrics, Scenario, SolitonSpec
from solitonlab.core.stationary import EXACT_MU, stationary_state
from solitonlab.core.variational import VariationalState, VariationalTrajectory
from solitonlab.infra.logging import log_event

# kinetic energy p^2 equals the binding energy 1/48 at this momentum
REST_MOMENTUM = math.sqrt(1.0 / 48.0)


# ----------------------------
# Analytic solutions
# ----------------------------

def analytic_ground_state(x: ArrayLike, t: float = 0.0, mu: float = EXACT_MU) -> NDArray[np.complex128] | complex:
    if not mu < 0.0:
        raise DomainError(f"mu must be negative for a bound state (got {mu})")
    a = math.sqrt(-mu)
    b = math.sqrt(-2.0 * mu)
    xs = np.asarray(x, dtype=float)
    values = b / np.cosh(a * xs) * np.exp(-1j * mu * t)
    return complex(values) if values.ndim == 0 else values


def analytic_moving_soliton(x: ArrayLike, spec: SolitonSpec) -> NDArray[np.complex128] | complex:
    xs = np.asarray(x, dtype=float) - spec.x0
    values = math.sqrt(1.0 / 8.0) * np.exp(1j * (spec.p * xs + spec.phase)) / np.cosh(xs / 4.0)
    return complex(values) if values.ndim == 0 else values


def boost_translate(psi: GaussianSum, x0: float, p: float, phase: float = 0.0) -> GaussianSum:
    """Map every term g(x) to g(x - x0) exp(i p (x - x0) + i phase)."""
    a, b, c = psi.alphas, psi.betas, psi.gammas
    return GaussianSum.from_arrays(
        a,
        b + 2.0 * a * x0 + 1j * p,
        c - a * x0 * x0 - b * x0 - 1j * p * x0 + 1j * phase,
    )


# ----------------------------
# Initial states
# ----------------------------

def soliton_overlap(first: SolitonSpec, second: SolitonSpec) -> float:
    """Integral of |psi_1| |psi_2| for two unit-norm sech profiles, d / sinh(d) with d = |dx0| / 4."""
    d = abs(first.x0 - second.x0) / 4.0
    return 1.0 if d == 0.0 else d / math.sinh(d)


def check_overlaps(scenario: Scenario) -> None:
    specs = scenario.solitons
    for i in range(len(specs)):
        for j in range(i + 1, len(specs)):
            overlap = soliton_overlap(specs[i], specs[j])
            if overlap > scenario.overlap_tolerance:
                raise OverlapError((i, j), overlap, scenario.overlap_tolerance)


@lru_cache(maxsize=16)
def _stationary_psi(n_gaussians: int) -> GaussianSum:
    return stationary_state(n_gaussians).state.psi


class InitialStates(NamedTuple):
    variational: VariationalState
    grid: GridState
    grouping: Tuple[Tuple[int, ...], ...]


def build_initial_states(scenario: Scenario) -> InitialStates:
    """Boosted stationary Gaussians for the variational engine, sampled sech profiles for the lattice."""
    check_overlaps(scenario)

    parts: List[GaussianSum] = []
    grouping: List[Tuple[int, ...]] = []
    offset = 0
    for spec in scenario.solitons:
        parts.append(boost_translate(_stationary_psi(spec.gaussians), spec.x0, spec.p, spec.phase))
        grouping.append(tuple(range(offset, offset + spec.gaussians)))
        offset += spec.gaussians
    variational = VariationalState(time=0.0, psi=concatenate(parts))

    def profile(x: NDArray[np.float64]) -> NDArray[np.complex128]:
        return sum(analytic_moving_soliton(x, spec) for spec in scenario.solitons)

    grid = sample_grid(scenario.domain, profile)

    log_event(
        "scenario_built",
        solitons=len(scenario.solitons),
        gaussians=scenario.total_gaussians,
        n_points=grid.n_points,
        norm_variational=norm_squared(variational.psi),
        norm_grid=grid_norm(grid),
    )
    return InitialStates(variational=variational, grid=grid, grouping=tuple(grouping))


# ----------------------------
# Comparison
# ----------------------------

def compare_states(var_state: VariationalState, grid_state: GridState, interaction: float = 1.0) -> ComparisonMetrics:
    """Mismatch of |psi|^2 with the variational function evaluated exactly at the lattice sites."""
    var_density = np.abs(evaluate(var_state.psi, grid_state.x)) ** 2
    diff = var_density - grid_state.density
    return ComparisonMetrics(
        time=grid_state.time,
        l2_density_mismatch=math.sqrt(float(trapezoid(diff * diff, dx=grid_state.dx))),
        sup_mismatch=float(np.max(np.abs(diff))),
        norm_variational=norm_squared(var_state.psi),
        energy_variational=energy(var_state.psi),
        norm_grid=grid_norm(grid_state),
        energy_grid=grid_energy(grid_state, interaction),
    )


def compare(
    var_traj: VariationalTrajectory,
    grid_traj: GridTrajectory,
    schedule: Sequence[float],
    interaction: float = 1.0,
) -> List[ComparisonMetrics]:
    return [compare_states(var_traj.state_at(t), grid_traj.state_at(t), interaction) for t in schedule]


# ----------------------------
# Presets
# ----------------------------

def collision_regime(p: float) -> str:
    return "high-energy" if abs(p) > REST_MOMENTUM else "low-energy"


def single_soliton(gaussians: int = 1, p: float = 0.0) -> Scenario:
    return Scenario(solitons=[SolitonSpec(p=p, gaussians=gaussians)], schedule=[0.0, 10.0, 20.0])


def two_soliton_collision(gaussians: int = 2, phase_difference: float = 0.0) -> Scenario:
    """Head-on collision at |p| = 1; the solitons meet around t = 8."""
    return Scenario(
        solitons=[
            SolitonSpec(x0=-16.0, p=1.0, gaussians=gaussians),
            SolitonSpec(x0=16.0, p=-1.0, phase=phase_difference, gaussians=gaussians),
        ],
        schedule=[0.0, 8.0, 20.0],
    )


def low_energy_collision(gaussians: int = 1) -> Scenario:
    """|p| = 0.05 is below the rest momentum; the solitons meet around t = 135."""
    return Scenario(
        solitons=[
            SolitonSpec(x0=-13.5, p=0.05, gaussians=gaussians),
            SolitonSpec(x0=13.5, p=-0.05, gaussians=gaussians),
        ],
        schedule=[0.0, 135.0, 270.0],
    )


def three_soliton_collision(gaussians: int = 1) -> Scenario:
    """Outer solitons at |p| = 1.5 hit a soliton at rest around t = 8."""
    return Scenario(
        solitons=[
            SolitonSpec(x0=-24.0, p=1.5, gaussians=gaussians),
            SolitonSpec(x0=0.0, p=0.0, gaussians=gaussians),
            SolitonSpec(x0=24.0, p=-1.5, gaussians=gaussians),
        ],
        schedule=[0.0, 8.0, 16.0],
    )


PRESETS: Dict[str, Callable[..., Scenario]] = {
    "single_soliton": single_soliton,
    "two_soliton_collision": two_soliton_collision,
    "low_energy_collision": low_energy_collision,
    "three_soliton_collision": three_soliton_collision,
}


def preset(name: str, **kwargs) -> Scenario:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return factory(**kwargs)
