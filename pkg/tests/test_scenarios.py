import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from helpers import normalized_gaussian
from solitonlab.core.errors import DomainError, OverlapError, ScheduleError
from solitonlab.core.gaussians import energy, evaluate, norm_squared
from solitonlab.core.grid import GridTrajectory, grid_energy, grid_norm, sample_grid
from solitonlab.core.scenarios import (
    REST_MOMENTUM,
    analytic_ground_state,
    analytic_moving_soliton,
    boost_translate,
    build_initial_states,
    check_overlaps,
    collision_regime,
    compare,
    compare_states,
    preset,
    single_soliton,
    soliton_overlap,
    three_soliton_collision,
    two_soliton_collision,
)
from solitonlab.core.schemas import GridDomain, Scenario, SolitonSpec
from solitonlab.core.stationary import EXACT_MU, SINGLE_GAUSSIAN_ALPHA
from solitonlab.core.variational import VariationalState, evolve, extract_observables


class TestAnalyticSolutions:
    def test_peak_value(self):
        assert_allclose(analytic_ground_state(0.0), math.sqrt(1.0 / 8.0), rtol=1e-15)

    def test_phase_rotates_with_mu(self):
        value = analytic_ground_state(0.0, t=8.0)
        assert_allclose(value, math.sqrt(1.0 / 8.0) * np.exp(0.5j), rtol=1e-14)

    def test_density_tail_slope(self):
        x = np.array([40.0, 41.0])
        slope = np.diff(np.log(np.abs(analytic_ground_state(x)) ** 2))[0]
        # finite-difference slope of log sech^2(x/4) differs from -1/2 by O(e^{-x/2})
        assert_allclose(slope, -0.5, rtol=1e-8)

    def test_unit_norm(self):
        total, _ = quad(lambda x: abs(analytic_ground_state(x)) ** 2, -np.inf, np.inf)
        assert_allclose(total, 1.0, rtol=1e-10)

    def test_bound_state_needs_negative_mu(self):
        with pytest.raises(DomainError):
            analytic_ground_state(0.0, mu=0.0)

    def test_moving_soliton(self):
        spec = SolitonSpec(x0=-5.0, p=0.3, phase=1.0)
        assert_allclose(analytic_moving_soliton(-5.0, spec), math.sqrt(1.0 / 8.0) * np.exp(1j), rtol=1e-14)
        at_rest = analytic_moving_soliton(np.linspace(-3, 3, 7), SolitonSpec())
        assert_allclose(at_rest, analytic_ground_state(np.linspace(-3, 3, 7)), rtol=1e-14)


class TestBoost:
    def test_zero_boost_is_identity(self):
        psi = normalized_gaussian(SINGLE_GAUSSIAN_ALPHA)
        x = np.linspace(-20.0, 20.0, 41)
        assert_allclose(evaluate(boost_translate(psi, 0.0, 0.0), x), evaluate(psi, x), rtol=1e-14)

    def test_moved_and_kicked_gaussian(self):
        psi = boost_translate(normalized_gaussian(SINGLE_GAUSSIAN_ALPHA), 10.0, 1.0)
        obs = extract_observables(VariationalState(time=0.0, psi=psi))
        assert_allclose(obs.positions, [10.0], rtol=1e-12)
        assert_allclose(obs.momenta, [1.0], rtol=1e-12)
        assert_allclose(obs.norm, 1.0, rtol=1e-12)

    def test_pointwise_definition(self):
        psi = normalized_gaussian(0.2 + 0.05j)
        boosted = boost_translate(psi, 3.0, -0.7, 0.4)
        x = np.linspace(-5.0, 10.0, 31)
        expected = evaluate(psi, x - 3.0) * np.exp(1j * (-0.7 * (x - 3.0) + 0.4))
        assert_allclose(evaluate(boosted, x), expected, rtol=1e-12)

    def test_boost_adds_kinetic_energy(self, ground_state_1):
        moved = boost_translate(ground_state_1.state.psi, -4.0, 0.6)
        assert_allclose(energy(moved), ground_state_1.energy + 0.36, rtol=1e-12)


class TestInitialStates:
    def test_collision_pair_norm_and_energy(self, stationary_ladder):
        initial = build_initial_states(two_soliton_collision())
        assert_allclose(norm_squared(initial.variational.psi), 2.0, atol=1e-4)
        assert_allclose(grid_norm(initial.grid), 2.0, atol=1e-4)
        assert_allclose(energy(initial.variational.psi), 2.0 * (stationary_ladder[2].energy + 1.0), atol=1e-6)
        assert_allclose(grid_energy(initial.grid), 2.0 * (-1.0 / 48.0 + 1.0), atol=5e-3)
        assert initial.grouping == ((0, 1), (2, 3))

    def test_solitons_too_close(self):
        scenario = Scenario(solitons=[SolitonSpec(x0=-2.0), SolitonSpec(x0=2.0)])
        with pytest.raises(OverlapError) as info:
            build_initial_states(scenario)
        assert info.value.pair == (0, 1)
        assert info.value.exit_code == 3

    def test_overlap_values(self):
        assert soliton_overlap(SolitonSpec(x0=-16.0), SolitonSpec(x0=16.0)) == pytest.approx(8.0 / math.sinh(8.0))
        assert soliton_overlap(SolitonSpec(), SolitonSpec()) == 1.0
        for name in ("two_soliton_collision", "low_energy_collision", "three_soliton_collision"):
            check_overlaps(preset(name))

    def test_three_soliton_start_is_mirror_symmetric(self):
        initial = build_initial_states(three_soliton_collision())
        density = initial.grid.density
        assert_allclose(density, density[::-1], atol=1e-12)
        traj = evolve(initial.variational, 2.0, 1e-10, grouping=initial.grouping)
        positions = traj.records[-1].positions
        assert_allclose(positions[0], -positions[2], atol=1e-6)
        assert abs(positions[1]) <= 1e-6


class TestDynamics:
    def test_moving_soliton_transit(self):
        initial = build_initial_states(single_soliton(p=0.5))
        traj = evolve(initial.variational, 10.0, 1e-10)
        assert_allclose(traj.records[-1].positions[0], 10.0, rtol=1e-2)
        assert_allclose(traj.records[-1].momenta[0], 0.5, rtol=1e-6)

    def test_symmetric_collision_stays_symmetric(self):
        initial = build_initial_states(two_soliton_collision(gaussians=1))
        traj = evolve(initial.variational, 4.0, 1e-10, times=[0.0, 2.0, 4.0], grouping=initial.grouping)
        for record in traj.records:
            assert_allclose(record.positions[0], -record.positions[1], atol=1e-6)
            assert_allclose(record.momenta[0], -record.momenta[1], atol=1e-6)
        # mirror partner of exp(-a x^2 + b x + c) is exp(-a x^2 - b x + c)
        for state in traj.states:
            psi = state.psi
            assert_allclose(psi.alphas[1], psi.alphas[0], rtol=0, atol=1e-8)
            assert_allclose(psi.betas[1], -psi.betas[0], rtol=0, atol=1e-8)
            assert_allclose(psi.gammas[1], psi.gammas[0], rtol=0, atol=1e-8)


class TestCompare:
    def test_identical_states_do_not_mismatch(self, ground_state_1):
        state = ground_state_1.state
        grid = sample_grid(GridDomain(x_min=-60.0, x_max=60.0), lambda x: evaluate(state.psi, x))
        metrics = compare_states(state, grid)
        assert metrics.l2_density_mismatch == 0.0
        assert metrics.sup_mismatch == 0.0
        assert_allclose(metrics.norm_grid, metrics.norm_variational, rtol=1e-8)

    def test_gaussian_against_sech(self, ground_state_1):
        grid = sample_grid(GridDomain(), analytic_ground_state)
        metrics = compare_states(ground_state_1.state, grid)
        assert 0.0 < metrics.sup_mismatch < 0.03
        assert metrics.energy_variational > metrics.energy_grid

    def test_missing_time(self, ground_state_1):
        var_traj = evolve(ground_state_1.state, 1.0, 1e-10)
        grid = sample_grid(GridDomain(x_min=-60.0, x_max=60.0), analytic_ground_state)
        with pytest.raises(ScheduleError):
            compare(var_traj, GridTrajectory(states=(grid,)), [1.0])


class TestPresets:
    def test_regimes(self):
        assert_allclose(REST_MOMENTUM**2, 1.0 / 48.0, rtol=1e-15)
        assert collision_regime(1.0) == "high-energy"
        assert collision_regime(-1.0) == "high-energy"
        assert collision_regime(0.05) == "low-energy"

    def test_presets(self):
        scenario = preset("two_soliton_collision", phase_difference=math.pi)
        assert scenario.solitons[1].phase == math.pi
        assert scenario.schedule == [0.0, 8.0, 20.0]
        assert preset("low_energy_collision").t_end == 270.0
        assert preset("three_soliton_collision").total_gaussians == 3

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            preset("four_soliton_collision")

    def test_mu_constant(self):
        assert EXACT_MU == -1.0 / 16.0
