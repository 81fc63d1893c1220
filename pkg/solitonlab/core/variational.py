"""
Time-dependent variational engine for a superposition of complex Gaussians.

The McLachlan principle applied to psi = sum_n g_n gives, per term,

    d alpha_n / dt = -4i alpha_n^2 + i V2_n
    d beta_n  / dt = -4i alpha_n beta_n - i V1_n
    d gamma_n / dt = -2i alpha_n + i beta_n^2 - i V0_n

where (V0, V1, V2) solve the 3N x 3N linear system K v = r obtained by
projecting sum_n g_n (V2 x^2 + V1 x + V0) = -|psi|^2 psi onto the tangent
functions dpsi/dgamma_k = g_k, dpsi/dbeta_k = x g_k, dpsi/dalpha_k = -x^2 g_k.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from numpy.typing import NDArray
from scipy.integrate import RK45

from solitonlab.core.errors import ScheduleError, StepSizeUnderflowError
from solitonlab.core.gaussians import (
    GaussianSum,
    energy,
    moment_table,
    norm_squared,
    pair_exponents,
    quartic_exponents,
    term_norms,
)
from solitonlab.core.schemas import ObservableRecord
from solitonlab.infra.logging import log_event

# rows: (power of x in the projector, sign) for gamma, beta, alpha
PROJECTORS: Tuple[Tuple[int, int], ...] = ((0, 1), (1, 1), (2, -1))
CONDITION_LIMIT = 1e12
MIN_STEP = 1e-12
FLAG_HISTORY = 64


# ----------------------------
# Value types
# ----------------------------

@dataclass(frozen=True)
class VariationalState:
    time: float
    psi: GaussianSum


@dataclass(frozen=True)
class PotentialCoefficients:
    v0: NDArray[np.complex128]
    v1: NDArray[np.complex128]
    v2: NDArray[np.complex128]
    regularized: bool
    residual: float
    condition: float

    def as_vector(self) -> NDArray[np.complex128]:
        return np.column_stack([self.v0, self.v1, self.v2]).reshape(-1)


@dataclass(frozen=True)
class TimeDerivative:
    dalpha: NDArray[np.complex128]
    dbeta: NDArray[np.complex128]
    dgamma: NDArray[np.complex128]
    potentials: PotentialCoefficients

    @property
    def regularized(self) -> bool:
        return self.potentials.regularized

    def to_vector(self) -> NDArray[np.complex128]:
        """Same layout as GaussianSum.to_vector."""
        return np.column_stack([self.dalpha, self.dbeta, self.dgamma]).reshape(-1)


@dataclass(frozen=True)
class VariationalObservables:
    positions: List[float]
    momenta: List[float]
    norm: float
    energy: float


@dataclass(frozen=True)
class VariationalTrajectory:
    states: Tuple[VariationalState, ...]
    records: Tuple[ObservableRecord, ...]
    grouping: Tuple[Tuple[int, ...], ...]
    regularized_count: int
    evaluations: int
    flag_history: Tuple[Tuple[float, bool], ...] = field(default=())

    def state_at(self, t: float, atol: float = 1e-9) -> VariationalState:
        for state in self.states:
            if abs(state.time - t) <= atol:
                return state
        raise ScheduleError(f"t={t} is not an output time of this variational trajectory")


# ----------------------------
# Linear system
# ----------------------------

def assemble_system(state: VariationalState) -> Tuple[NDArray, NDArray]:
    """Matrix K and right-hand side r, rows (term k, projector), columns (term n, monomial)."""
    psi = state.psi
    n = len(psi)

    pair = moment_table(*pair_exponents(psi), max_degree=4)
    blocks = np.empty((n, 3, n, 3), dtype=complex)
    for j, (power, sign) in enumerate(PROJECTORS):
        for i in range(3):
            blocks[:, j, :, i] = sign * pair[power + i]

    # sum over (l, m, n) of conj(g_k) conj(g_l) g_m g_n x^d, d = 0..2
    quartic = moment_table(*quartic_exponents(psi), max_degree=2).sum(axis=(2, 3, 4))
    rhs = np.empty((n, 3), dtype=complex)
    for j, (power, sign) in enumerate(PROJECTORS):
        rhs[:, j] = -sign * quartic[power]

    return blocks.reshape(3 * n, 3 * n), rhs.reshape(3 * n)


def solve_potentials(K: NDArray, r: NDArray) -> PotentialCoefficients:
    """
    Solve K v = r by LU with partial pivoting on the Jacobi-equilibrated matrix.

    Falls back to a truncated minimum-norm least-squares solve, and flags the
    result, when the scaled condition number exceeds CONDITION_LIMIT or a pivot
    vanishes. This happens when two Gaussians nearly coincide.
    """
    K = np.asarray(K, dtype=complex)
    r = np.asarray(r, dtype=complex)

    diag = np.abs(np.diag(K))
    scale = np.where(diag > 0.0, 1.0 / np.sqrt(np.where(diag > 0.0, diag, 1.0)), 1.0)
    Ks = scale[:, None] * K * scale[None, :]
    rs = scale * r

    with np.errstate(divide="ignore", invalid="ignore"):
        condition = float(np.linalg.cond(Ks))
    regularized = not math.isfinite(condition) or condition > CONDITION_LIMIT

    y: Optional[NDArray] = None
    if not regularized:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            try:
                lu, piv = scipy.linalg.lu_factor(Ks, check_finite=False)
                pivots = np.abs(np.diag(lu))
                if pivots.min() <= np.finfo(float).eps * pivots.max():
                    regularized = True
                else:
                    y = scipy.linalg.lu_solve((lu, piv), rs, check_finite=False)
            except (scipy.linalg.LinAlgWarning, scipy.linalg.LinAlgError):
                regularized = True

    if y is None:
        y, *_ = scipy.linalg.lstsq(Ks, rs, cond=1.0 / CONDITION_LIMIT, check_finite=False)

    v = scale * y
    residual = float(np.linalg.norm(K @ v - r))
    if regularized:
        log_event("potential_solve_regularized", condition=condition, residual=residual, size=int(r.size))
    blocks = v.reshape(-1, 3)
    return PotentialCoefficients(
        v0=blocks[:, 0].copy(),
        v1=blocks[:, 1].copy(),
        v2=blocks[:, 2].copy(),
        regularized=regularized,
        residual=residual,
        condition=condition,
    )


# ----------------------------
# Equations of motion
# ----------------------------

def time_derivative(state: VariationalState) -> TimeDerivative:
    potentials = solve_potentials(*assemble_system(state))
    a = state.psi.alphas
    b = state.psi.betas
    return TimeDerivative(
        dalpha=-4j * a * a + 1j * potentials.v2,
        dbeta=-4j * a * b - 1j * potentials.v1,
        dgamma=-2j * a + 1j * b * b - 1j * potentials.v0,
        potentials=potentials,
    )


def _check_grouping(grouping: Sequence[Sequence[int]], n_terms: int) -> Tuple[Tuple[int, ...], ...]:
    groups = tuple(tuple(int(i) for i in g) for g in grouping)
    flat = sorted(i for g in groups for i in g)
    if flat != list(range(n_terms)) or any(not g for g in groups):
        raise ValueError(f"grouping {groups} does not partition the {n_terms} term indices")
    return groups


def extract_observables(
    state: VariationalState, grouping: Optional[Sequence[Sequence[int]]] = None
) -> VariationalObservables:
    """
    Per-group position and momentum plus global norm and energy.

    Per term x_n = Re(beta_n) / (2 Re alpha_n) and p_n = Im(beta_n) - 2 Im(alpha_n) x_n,
    the expectation values of a single Gaussian; a group reports the average of
    its members weighted by <g_n|g_n>.
    """
    psi = state.psi
    groups = _check_grouping(grouping if grouping is not None else [range(len(psi))], len(psi))

    a, b = psi.alphas, psi.betas
    x_terms = b.real / (2.0 * a.real)
    p_terms = b.imag - 2.0 * a.imag * x_terms
    weights = term_norms(psi)

    positions: List[float] = []
    momenta: List[float] = []
    for group in groups:
        idx = list(group)
        w = weights[idx]
        total = float(w.sum())
        if total > 0.0:
            positions.append(float(np.dot(w, x_terms[idx]) / total))
            momenta.append(float(np.dot(w, p_terms[idx]) / total))
        else:
            positions.append(float("nan"))
            momenta.append(float("nan"))

    return VariationalObservables(
        positions=positions,
        momenta=momenta,
        norm=norm_squared(psi),
        energy=energy(psi),
    )


def _record(state: VariationalState, groups, regularized_count: int) -> ObservableRecord:
    obs = extract_observables(state, groups)
    return ObservableRecord(
        time=state.time,
        norm=obs.norm,
        energy=obs.energy,
        positions=obs.positions,
        momenta=obs.momenta,
        regularized_count=regularized_count,
    )


def evolve(
    state: VariationalState,
    t_end: float,
    tol: float,
    *,
    times: Optional[Sequence[float]] = None,
    grouping: Optional[Sequence[Sequence[int]]] = None,
    min_step: float = MIN_STEP,
) -> VariationalTrajectory:
    """
    Integrate the equations of motion with the Dormand-Prince 5(4) pair.

    `times` is the output grid (default: only t_end); states are taken from the
    dense output at those times. rtol = atol = tol.
    """
    if not t_end > state.time:
        raise ScheduleError(f"t_end={t_end} must be later than the state time {state.time}")
    if not tol > 0.0:
        raise ValueError("tol must be positive")

    output_times = sorted(float(t) for t in (times if times is not None else [t_end]))
    if output_times and (output_times[0] < state.time or output_times[-1] > t_end):
        raise ScheduleError(f"output times must lie in [{state.time}, {t_end}]")

    groups = _check_grouping(grouping if grouping is not None else [range(len(state.psi))], len(state.psi))
    flags: Deque[Tuple[float, bool]] = deque(maxlen=FLAG_HISTORY)
    counters = {"evaluations": 0, "regularized": 0}

    def rhs(t: float, z: NDArray) -> NDArray:
        derivative = time_derivative(VariationalState(time=t, psi=GaussianSum.from_vector(z)))
        counters["evaluations"] += 1
        if derivative.regularized:
            counters["regularized"] += 1
        flags.append((t, derivative.regularized))
        return derivative.to_vector()

    log_event(
        "variational_evolve_start",
        t0=state.time,
        t_end=t_end,
        tol=tol,
        n_gaussians=len(state.psi),
        outputs=len(output_times),
    )

    pending: Deque[float] = deque(output_times)
    states: List[VariationalState] = []
    records: List[ObservableRecord] = []

    def emit(t: float, z: NDArray) -> None:
        out = VariationalState(time=t, psi=GaussianSum.from_vector(z))
        states.append(out)
        records.append(_record(out, groups, counters["regularized"]))
        log_event(
            "variational_evolve_output",
            t=t,
            norm=records[-1].norm,
            energy=records[-1].energy,
            regularized=counters["regularized"],
        )

    while pending and pending[0] <= state.time:
        emit(pending.popleft(), state.psi.to_vector())

    solver = RK45(rhs, state.time, state.psi.to_vector(), t_end, rtol=tol, atol=tol)
    while solver.status == "running":
        message = solver.step()
        if solver.status == "failed" or (solver.status == "running" and solver.step_size < min_step):
            log_event("variational_evolve_underflow", t=solver.t, message=message)
            raise StepSizeUnderflowError(
                time=float(solver.t),
                step_size=float(solver.step_size or 0.0),
                regularized_history=list(flags),
            )
        if pending and pending[0] <= solver.t:
            dense = solver.dense_output()
            while pending and pending[0] <= solver.t:
                t_out = pending.popleft()
                emit(t_out, solver.y.copy() if t_out == solver.t else dense(t_out))

    log_event(
        "variational_evolve_done",
        t=float(solver.t),
        evaluations=counters["evaluations"],
        regularized=counters["regularized"],
    )

    return VariationalTrajectory(
        states=tuple(states),
        records=tuple(records),
        grouping=groups,
        regularized_count=counters["regularized"],
        evaluations=counters["evaluations"],
        flag_history=tuple(flags),
    )
