import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from solitonlab.core.errors import ConvergenceError
from solitonlab.core.gaussians import evaluate
from solitonlab.core.stationary import (
    EXACT_ENERGY,
    EXACT_MU,
    SINGLE_GAUSSIAN_ALPHA,
    default_seed_widths,
    stationary_state,
)


def test_single_gaussian_optimum(ground_state_1):
    assert abs(ground_state_1.widths[0] - 1.0 / (16.0 * math.pi)) <= 1e-10
    assert_allclose(ground_state_1.energy, -1.0 / (16.0 * math.pi), rtol=1e-9)
    assert abs(ground_state_1.delta_energy - 9.39e-4) <= 1e-6
    assert ground_state_1.mu < 0.0
    assert ground_state_1.residual <= 1e-10
    assert not ground_state_1.regularized


def test_single_gaussian_is_normalized(ground_state_1):
    psi = ground_state_1.state.psi
    assert psi.betas[0] == 0j
    # integral of exp(-2 alpha x^2 + 2 gamma) = 1
    assert_allclose(math.sqrt(math.pi / (2 * psi.alphas[0].real)) * math.exp(2 * psi.gammas[0].real), 1.0, rtol=1e-10)


def test_seed_ladder():
    assert_allclose(default_seed_widths(1), [SINGLE_GAUSSIAN_ALPHA])
    seeds = default_seed_widths(4)
    assert_allclose(seeds[1:] / seeds[:-1], 2.0)
    assert_allclose(math.prod(seeds) ** 0.25, SINGLE_GAUSSIAN_ALPHA, rtol=1e-12)


def test_energy_converges_with_more_gaussians(stationary_ladder):
    deltas = [stationary_ladder[n].delta_energy for n in range(1, 7)]
    assert all(d > 0.0 for d in deltas)
    assert all(later < earlier for earlier, later in zip(deltas, deltas[1:]))
    # on average at least one order of magnitude per added Gaussian
    assert deltas[0] / deltas[-1] >= 10.0**5
    assert deltas[-1] <= 1e-8


def test_widths_spread_around_single_value(stationary_ladder):
    widths = stationary_ladder[6].widths
    assert widths.min() < SINGLE_GAUSSIAN_ALPHA < widths.max()
    assert np.all(np.diff(widths) > 0.0)


def test_six_gaussians_recover_the_exponential_tail(stationary_ladder):
    # |psi|^2 ~ exp(-x / 2) for the exact soliton
    x = np.linspace(10.0, 25.0, 151)
    density = np.abs(evaluate(stationary_ladder[6].state.psi, x)) ** 2
    slope, _ = np.polyfit(x, np.log(density), 1)
    assert_allclose(slope, -0.5, rtol=0.1)


def test_chemical_potential_approaches_exact_value(stationary_ladder):
    errors = [abs(stationary_ladder[n].mu - EXACT_MU) for n in (1, 3, 6)]
    assert errors[2] < errors[1] < errors[0]
    assert stationary_ladder[6].energy > EXACT_ENERGY


def test_bad_arguments():
    with pytest.raises(ValueError):
        stationary_state(0)
    with pytest.raises(ValueError):
        stationary_state(2, seed_widths=[0.1])
    with pytest.raises(ValueError):
        stationary_state(1, seed_widths=[-0.1])


def test_non_convergence_reports_best_residual():
    with pytest.raises(ConvergenceError) as info:
        stationary_state(1, seed_widths=[1.0], relax=False, max_iterations=0)
    assert info.value.best_residual > 1e-8
    assert info.value.iterations == 0
    assert info.value.exit_code == 5
