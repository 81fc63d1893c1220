"""
Stationary ground state of a single soliton in the center-of-mass frame.

With beta_n = 0 and real alpha_n, gamma_n the state is stationary when every
alpha_n is frozen and every gamma_n rotates with the common rate -mu:

    d alpha_n / dt = 0,   d gamma_n / dt = -i mu,   <psi|psi> = 1.

The unknowns (alpha_1..N, gamma_1..N, mu) are found by a damped Newton
iteration with a central-difference Jacobian. The seeds are first relaxed by
minimizing the energy of the normalized trial function, whose critical points
are the same stationary states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from numpy.typing import NDArray
from scipy.optimize import minimize

from solitonlab.core.errors import ConvergenceError
from solitonlab.core.gaussians import GaussianSum, energy, interaction_integral, kinetic_energy, norm_squared
from solitonlab.core.variational import VariationalState, time_derivative
from solitonlab.infra.logging import log_event

SINGLE_GAUSSIAN_ALPHA = 1.0 / (16.0 * math.pi)
EXACT_ENERGY = -1.0 / 48.0
EXACT_MU = -1.0 / 16.0

MAX_HALVINGS = 30


@dataclass(frozen=True)
class StationaryResult:
    state: VariationalState
    mu: float
    residual: float
    energy: float
    iterations: int
    regularized: bool

    @property
    def delta_energy(self) -> float:
        """Energy above the exact soliton, E + 1/48."""
        return self.energy - EXACT_ENERGY

    @property
    def widths(self) -> NDArray[np.float64]:
        return self.state.psi.alphas.real.copy()

    @property
    def weights(self) -> NDArray[np.float64]:
        return self.state.psi.gammas.real.copy()


def default_seed_widths(n_gaussians: int) -> NDArray[np.float64]:
    """Geometric ladder with ratio 2 centered on 1/(16 pi)."""
    steps = np.arange(n_gaussians, dtype=float) - 0.5 * (n_gaussians - 1)
    return SINGLE_GAUSSIAN_ALPHA * 2.0 ** steps


def _psi(alphas: NDArray, gammas: NDArray) -> GaussianSum:
    return GaussianSum.from_arrays(alphas, np.zeros_like(alphas), gammas)


def _normalized_gammas(alphas: NDArray, gammas: NDArray) -> NDArray:
    return gammas - 0.5 * math.log(norm_squared(_psi(alphas, gammas)))


def _residual(x: NDArray, n: int) -> Tuple[NDArray, bool]:
    alphas, gammas, mu = x[:n], x[n : 2 * n], x[-1]
    psi = _psi(alphas, gammas)
    derivative = time_derivative(VariationalState(time=0.0, psi=psi))
    F = np.concatenate(
        [
            derivative.dalpha.real,
            derivative.dalpha.imag,
            derivative.dgamma.real,
            derivative.dgamma.imag + mu,
            [norm_squared(psi) - 1.0],
        ]
    )
    return F, derivative.regularized


def _jacobian(x: NDArray, n: int) -> NDArray:
    columns = []
    for i in range(x.size):
        h = 1e-7 * max(abs(x[i]), 1e-3)
        forward, backward = x.copy(), x.copy()
        forward[i] += h
        backward[i] -= h
        columns.append((_residual(forward, n)[0] - _residual(backward, n)[0]) / (2.0 * h))
    return np.column_stack(columns)


def _relax(alphas: NDArray, gammas: NDArray) -> Tuple[NDArray, NDArray]:
    n = alphas.size

    def normalized_energy(theta: NDArray) -> float:
        psi = _psi(np.exp(theta[:n]), theta[n:])
        nrm = norm_squared(psi)
        return kinetic_energy(psi) / nrm - 0.5 * interaction_integral(psi) / nrm**2

    lo, hi = math.log(alphas.min()) - 7.0, math.log(alphas.max()) + 7.0
    bounds = [(lo, hi)] * n + [(-50.0, 50.0)] * n
    result = minimize(
        normalized_energy,
        np.concatenate([np.log(alphas), gammas]),
        method="L-BFGS-B",
        bounds=bounds,
        options={"maxiter": 5000, "ftol": 1e-15, "gtol": 1e-12},
    )
    relaxed_alphas = np.exp(result.x[:n])
    return relaxed_alphas, _normalized_gammas(relaxed_alphas, result.x[n:])


def stationary_state(
    n_gaussians: int,
    seed_widths: Optional[Sequence[float]] = None,
    *,
    max_iterations: int = 60,
    tolerance: float = 1e-12,
    accept_residual: float = 1e-8,
    relax: bool = True,
) -> StationaryResult:
    """Root search for the N_g-term ground state; see the module docstring."""
    if n_gaussians < 1:
        raise ValueError("n_gaussians must be at least 1")
    alphas = np.asarray(seed_widths if seed_widths is not None else default_seed_widths(n_gaussians), dtype=float)
    if alphas.size != n_gaussians or np.any(alphas <= 0.0):
        raise ValueError("seed_widths must hold n_gaussians positive values")

    gammas = _normalized_gammas(alphas, np.zeros(n_gaussians))
    if relax:
        alphas, gammas = _relax(alphas, gammas)

    n = n_gaussians
    seed_derivative = time_derivative(VariationalState(time=0.0, psi=_psi(alphas, gammas)))
    mu0 = -float(np.mean(seed_derivative.dgamma.imag))
    x = np.concatenate([alphas, gammas, [mu0]])

    log_event("stationary_search_start", n_gaussians=n, seeds=alphas.tolist(), mu0=mu0)

    F, regularized = _residual(x, n)
    fnorm = float(np.linalg.norm(F))
    iterations = 0
    while fnorm > tolerance and iterations < max_iterations:
        iterations += 1
        step, *_ = scipy.linalg.lstsq(_jacobian(x, n), -F)

        damping = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            trial = x + damping * step
            if np.all(trial[:n] > 0.0):
                F_trial, reg_trial = _residual(trial, n)
                f_trial = float(np.linalg.norm(F_trial))
                if f_trial < fnorm:
                    x, F, fnorm, regularized = trial, F_trial, f_trial, reg_trial
                    accepted = True
                    break
            damping *= 0.5

        log_event("stationary_search_iteration", iteration=iterations, residual=fnorm, damping=damping)
        if not accepted:
            break

    if fnorm > accept_residual:
        raise ConvergenceError(
            f"stationary search for {n} Gaussians did not converge",
            best_residual=fnorm,
            iterations=iterations,
        )

    order = np.argsort(x[:n])
    psi = _psi(x[:n][order], x[n : 2 * n][order])
    state = VariationalState(time=0.0, psi=psi)
    result = StationaryResult(
        state=state,
        mu=float(x[-1]),
        residual=fnorm,
        energy=energy(psi),
        iterations=iterations,
        regularized=regularized,
    )
    log_event(
        "stationary_search_done",
        n_gaussians=n,
        mu=result.mu,
        energy=result.energy,
        delta_energy=result.delta_energy,
        residual=fnorm,
        iterations=iterations,
    )
    return result
