import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.signal import find_peaks

from helpers import dense_grid, integrate, normalized_gaussian, random_sum, terms_on_grid
from solitonlab.core.errors import ScheduleError
from solitonlab.core.gaussians import GaussianSum, GaussianTerm, concatenate
from solitonlab.core.hamiltonian import alpha_from_coordinates, collective_coordinates, hamilton_trajectory, harmonic_frequency
from solitonlab.core.scenarios import boost_translate
from solitonlab.core.variational import (
    PROJECTORS,
    VariationalState,
    assemble_system,
    evolve,
    extract_observables,
    solve_potentials,
    time_derivative,
)

ALPHA_1 = 1.0 / (16.0 * math.pi)


def state_of(psi: GaussianSum) -> VariationalState:
    return VariationalState(time=0.0, psi=psi)


class TestLinearSystem:
    def test_identity(self):
        r = np.zeros(3, dtype=complex)
        r[0] = 1.0
        pot = solve_potentials(np.eye(3), r)
        assert_allclose(pot.as_vector(), r)
        assert not pot.regularized

    def test_matrix_against_quadrature(self, rng):
        psi = random_sum(rng, 2)
        K, r = assemble_system(state_of(psi))
        n = len(psi)

        x = dense_grid()
        g = terms_on_grid(psi, x)
        values = g.sum(axis=0)
        nonlinear = np.abs(values) ** 2 * values

        expected_K = np.empty_like(K)
        expected_r = np.empty_like(r)
        for k in range(n):
            for j, (power, sign) in enumerate(PROJECTORS):
                projector = sign * x**power * g[k]
                expected_r[3 * k + j] = -integrate(np.conj(projector) * nonlinear, x)
                for m in range(n):
                    for i in range(3):
                        expected_K[3 * k + j, 3 * m + i] = integrate(np.conj(projector) * x**i * g[m], x)

        assert_allclose(K, expected_K, rtol=0, atol=1e-8 * np.abs(expected_K).max())
        assert_allclose(r, expected_r, rtol=0, atol=1e-8 * np.abs(expected_r).max())

    def test_ground_state_residual(self, ground_state_1):
        pot = solve_potentials(*assemble_system(ground_state_1.state))
        assert pot.residual <= 1e-12
        assert not pot.regularized

    def test_even_state_has_no_linear_potential(self):
        psi = GaussianSum((GaussianTerm(0.3 + 0.2j, 0.0, 0.1j), GaussianTerm(0.05 - 0.01j, 0.0, -0.4)))
        pot = solve_potentials(*assemble_system(state_of(psi)))
        assert_allclose(pot.v1, 0.0, atol=1e-12 * np.abs(pot.as_vector()).max())

    def test_near_coincident_terms_are_regularized(self):
        g = GaussianTerm(0.1, 0.0, -1.0)
        twin = GaussianTerm(0.1 + 1e-9, 0.0, -1.0)
        pot = solve_potentials(*assemble_system(state_of(GaussianSum((g, twin)))))
        assert pot.regularized
        assert np.all(np.isfinite(pot.as_vector()))


class TestTimeDerivative:
    def test_ground_state_is_stationary(self, ground_state_1):
        d = time_derivative(ground_state_1.state)
        assert_allclose(d.dalpha, 0.0, atol=1e-11)
        assert_allclose(d.dbeta, 0.0, atol=1e-11)
        assert_allclose(d.dgamma.real, 0.0, atol=1e-11)
        assert_allclose(-d.dgamma.imag, ground_state_1.mu, rtol=1e-9)

    def test_free_gaussian_equations(self):
        # weak and wide: the nonlinear term is negligible
        psi = GaussianSum((GaussianTerm(1e-3, 0.0, -40.0),))
        d = time_derivative(state_of(psi))
        assert_allclose(d.dalpha, -4j * 1e-6, rtol=1e-6)

    def test_boosted_ground_state_moves_with_twice_the_momentum(self, ground_state_1):
        p = 0.7
        psi = boost_translate(ground_state_1.state.psi, 3.0, p)
        d = time_derivative(state_of(psi))
        alpha = psi.alphas[0]
        velocity = d.dbeta[0].real / (2.0 * alpha.real) - psi.betas[0].real * d.dalpha[0].real / (2.0 * alpha.real**2)
        assert_allclose(velocity, 2.0 * p, rtol=1e-8)

    def test_zero_amplitude_term_changes_nothing(self, ground_state_1):
        psi = ground_state_1.state.psi
        padded = concatenate([psi, GaussianSum((GaussianTerm(0.1, 0.0, -1000.0),))])
        alone = time_derivative(state_of(psi))
        joined = time_derivative(state_of(padded))
        assert_allclose(joined.dalpha[0], alone.dalpha[0], atol=1e-10)
        assert_allclose(joined.dbeta[0], alone.dbeta[0], atol=1e-10)
        assert_allclose(joined.dgamma[0], alone.dgamma[0], atol=1e-10)

    def test_projected_residual_vanishes(self, rng):
        """<dpsi/dz_k | psi_dot - i psi'' - i |psi|^2 psi> = 0 for every tangent function."""
        psi = random_sum(rng, 2)
        d = time_derivative(state_of(psi))

        x = dense_grid()
        g = terms_on_grid(psi, x)
        values = g.sum(axis=0)
        a, b = psi.alphas[:, None], psi.betas[:, None]
        second = ((4 * a * a * x**2 - 4 * a * b * x + b * b - 2 * a) * g).sum(axis=0)
        exact_rate = 1j * second + 1j * np.abs(values) ** 2 * values
        model_rate = ((-d.dalpha[:, None] * x**2 + d.dbeta[:, None] * x + d.dgamma[:, None]) * g).sum(axis=0)

        for k in range(len(psi)):
            for power, sign in PROJECTORS:
                projector = sign * x**power * g[k]
                scale = abs(integrate(np.conj(projector) * exact_rate, x)) + 1.0
                residual = integrate(np.conj(projector) * (model_rate - exact_rate), x)
                assert abs(residual) <= 1e-8 * scale


class TestObservables:
    def test_boosted_term(self):
        beta = 2.0 * ALPHA_1 * 10.0 + 1j
        obs = extract_observables(state_of(GaussianSum((GaussianTerm(ALPHA_1, beta, 0.0),))))
        assert_allclose(obs.positions, [10.0], rtol=1e-14)
        assert_allclose(obs.momenta, [1.0], rtol=1e-14)

    def test_ground_state_at_rest(self, ground_state_1):
        obs = extract_observables(ground_state_1.state)
        assert obs.positions == [0.0]
        assert obs.momenta == [0.0]
        assert_allclose(obs.norm, 1.0, rtol=1e-10)

    def test_groups_report_their_own_soliton(self, ground_state_1):
        psi = ground_state_1.state.psi
        joined = concatenate([boost_translate(psi, -16.0, 1.0), boost_translate(psi, 16.0, -1.0)])
        obs = extract_observables(state_of(joined), [(0,), (1,)])
        assert_allclose(obs.positions, [-16.0, 16.0], rtol=1e-12)
        assert_allclose(obs.momenta, [1.0, -1.0], rtol=1e-12)

    def test_grouping_must_partition(self, ground_state_1):
        with pytest.raises(ValueError):
            extract_observables(ground_state_1.state, [(0,), (0,)])


class TestEvolve:
    def test_requires_future_end_time(self, ground_state_1):
        with pytest.raises(ScheduleError):
            evolve(ground_state_1.state, 0.0, 1e-10)

    def test_stationary_state_stays_put(self, ground_state_1):
        traj = evolve(ground_state_1.state, 100.0, 1e-10, times=[0.0, 50.0, 100.0])
        assert [s.time for s in traj.states] == [0.0, 50.0, 100.0]
        final = traj.states[-1].psi
        assert abs(final.alphas[0] - ground_state_1.state.psi.alphas[0]) <= 1e-8
        assert abs(traj.records[-1].energy - traj.records[0].energy) <= 1e-8
        # phase rotates as exp(-i mu t)
        assert_allclose(final.gammas[0].imag, -ground_state_1.mu * 100.0, rtol=1e-7)

    def test_state_at_unknown_time(self, ground_state_1):
        traj = evolve(ground_state_1.state, 1.0, 1e-10)
        with pytest.raises(ScheduleError):
            traj.state_at(0.5)

    def test_norm_and_energy_are_conserved(self, ground_state_1):
        psi = ground_state_1.state.psi
        joined = concatenate([boost_translate(psi, -6.0, 0.8), boost_translate(psi, 6.0, -0.8, math.pi / 3)])
        traj = evolve(state_of(joined), 10.0, 1e-10, times=np.linspace(0.0, 10.0, 11), grouping=[(0,), (1,)])
        norms = np.array([r.norm for r in traj.records])
        energies = np.array([r.energy for r in traj.records])
        assert np.max(np.abs(norms / norms[0] - 1.0)) <= 1e-6
        assert np.max(np.abs(energies / energies[0] - 1.0)) <= 1e-6

    def test_width_oscillation_matches_harmonic_frequency(self):
        psi = normalized_gaussian(1.05 * ALPHA_1)
        times = np.linspace(0.0, 170.0, 1701)
        traj = evolve(state_of(psi), 170.0, 1e-10, times=times)
        q = np.array([collective_coordinates(s.psi.terms[0])[0] for s in traj.states])
        peaks, _ = find_peaks(q)
        period = np.mean(np.diff(times[peaks]))
        assert_allclose(period, 2.0 * math.pi / harmonic_frequency(), rtol=0.02)

    def test_single_gaussian_follows_hamilton_equations(self):
        q0, p0 = 3.0, 0.01
        alpha = alpha_from_coordinates(q0, p0)
        a = alpha.real
        psi = GaussianSum((GaussianTerm(alpha, 0.0, -0.25 * math.log(math.pi / (2.0 * a))),))
        times = np.linspace(0.0, 50.0, 51)
        traj = evolve(state_of(psi), 50.0, 1e-12, times=times)
        qp = np.array([collective_coordinates(s.psi.terms[0]) for s in traj.states])
        q_ref, p_ref = hamilton_trajectory(q0, p0, times)
        assert_allclose(qp[:, 0], q_ref, rtol=0, atol=1e-6)
        assert_allclose(qp[:, 1], p_ref, rtol=0, atol=1e-6)
