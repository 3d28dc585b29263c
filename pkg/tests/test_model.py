"""Tendencies, RK4 stepping and trajectories."""

import math

import numpy as np
import pytest

from stratwave import exact
from stratwave.conservation import ConservedVectorId, global_drift
from stratwave.grid import FieldState, Grid2D, PhysicalParams, rng_from_seed
from stratwave.model import (
    BlowUpError,
    default_dt,
    equation_residual_terms,
    rhs,
    simulate,
    step_rk4,
    term_scale,
)

from conftest import max_abs


def plane_wave(params, k=1, m=1):
    return exact.beam_solution(exact.plane_wave_beam(exact.WaveVector(k, m)), params)


class TestRhs:
    def test_residuals_vanish_with_own_tendencies(self, random_state, params):
        tend = rhs(random_state, params)
        groups = equation_residual_terms(random_state, params, tend.dv_dt, tend.drho_dt, tend.dzeta_dt)
        for terms in groups:
            assert max_abs(sum(terms)) <= 1e-11 * term_scale(terms)

    def test_dpsi_dt_is_inverse_laplacian(self, random_state, params):
        tend = rhs(random_state, params)
        g = random_state.grid
        assert max_abs(g.laplacian(tend.dpsi_dt) - (tend.dzeta_dt - tend.dzeta_dt.mean())) < 1e-10

    def test_gauge_independence(self, random_state, params):
        a = rhs(random_state, params)
        b = rhs(random_state.replace(psi=random_state.psi + 11.0), params)
        for x, y in ((a.dv_dt, b.dv_dt), (a.drho_dt, b.drho_dt), (a.dzeta_dt, b.dzeta_dt)):
            assert max_abs(x - y) <= 1e-12 * max_abs(x)

    def test_linear_terms_for_single_mode(self, params):
        # a single Fourier mode has vanishing brackets, so the tendencies are linear
        g = Grid2D(16, 16)
        X, Z = g.coords
        psi = np.cos(X + 2 * Z)
        zeros = np.zeros(g.shape)
        tend = rhs(FieldState(g, zeros, zeros, psi), params)
        assert max_abs(tend.dv_dt - (-params.f * g.dz_(psi))) < 1e-13
        assert max_abs(tend.drho_dt - (-(params.N**2 / params.g) * g.dx_(psi))) < 1e-13
        # the bracket J(psi, zeta) is a difference of products of size |k|^4
        assert max_abs(tend.dzeta_dt) < 1e-13 * 5**2

    def test_exact_solution_has_zero_residual(self, params):
        sol = plane_wave(params, 2, 1)
        g = Grid2D(32, 32)
        state = sol.sample(g, 0.3)
        d = sol.evaluate(0.3, *g.coords)
        groups = equation_residual_terms(state, params, d["v_t"], d["rho_t"], d["psi_xxt"] + d["psi_zzt"])
        for terms in groups:
            assert max_abs(sum(terms)) < 1e-12 * term_scale(terms)


class TestStepping:
    def test_zero_state_stays_zero(self, params, grid):
        for dt in (1e-3, 0.1, 1.0):
            out = step_rk4(FieldState.zeros(grid), params, dt)
            assert max_abs(out.v) == max_abs(out.rho) == max_abs(out.psi) == 0.0

    def test_step_rejects_bad_dt(self, random_state, params):
        with pytest.raises(ValueError):
            step_rk4(random_state, params, 0.0)

    def test_time_advances(self, random_state, params):
        assert step_rk4(random_state.replace(t=1.0), params, 0.25).t == 1.25

    def test_psi_mean_is_carried(self, random_state, params):
        state = random_state.replace(psi=random_state.psi + 5.0)
        out = step_rk4(state, params, 1e-3)
        assert np.mean(out.psi) == pytest.approx(np.mean(state.psi), abs=1e-12)

    def test_default_dt(self, params):
        g = Grid2D(32, 32)
        zero = FieldState.zeros(g)
        assert default_dt(zero, params) == pytest.approx(0.1 * g.dx / params.N)


class TestSimulate:
    def test_zero_steps(self, random_state, params):
        traj = simulate(random_state, params, 0.01, 0)
        assert len(traj) == 1 and traj.states[0] is random_state
        assert set(traj.integrals[0]) == {v.value for v in ConservedVectorId}

    def test_snapshot_cadence_and_callback(self, random_state, params):
        seen = []
        traj = simulate(random_state.scaled(0.1), params, 0.01, 10, 5, callback=seen.append)
        assert len(traj) == 3 and len(seen) == 3
        assert np.allclose(traj.times, [0.0, 0.05, 0.1])

    def test_argument_checks(self, random_state, params):
        with pytest.raises(ValueError):
            simulate(random_state, params, 0.01, -1)
        with pytest.raises(ValueError):
            simulate(random_state, params, 0.01, 1, 0)
        with pytest.raises(ValueError):
            simulate(random_state, params, -0.01, 1)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_blow_up_keeps_partial_trajectory(self, params, grid, rng):
        state = FieldState.random(grid, rng, amplitude=1e3)
        with pytest.raises(BlowUpError) as info:
            simulate(state, params, 10.0, 50)
        err = info.value
        assert err.trajectory is not None and len(err.trajectory) >= 1
        assert err.t > 0

    def test_plane_wave_one_period(self, params):
        sol = plane_wave(params)
        g = Grid2D(64, 64)
        T = 2 * math.pi / sol.omega
        traj = simulate(sol.sample(g), params, T / 200, 200, 50)
        for s in traj.states:
            ref = sol.sample(g, s.t)
            assert max(max_abs(a - b) for a, b in ((s.v, ref.v), (s.rho, ref.rho), (s.psi, ref.psi))) <= 1e-6

    def test_deterministic(self, params, grid):
        start = FieldState.random(grid, rng_from_seed(3), amplitude=0.2)
        a = simulate(start, params, 0.01, 20, 20).states[-1]
        b = simulate(start, params, 0.01, 20, 20).states[-1]
        assert np.array_equal(a.psi, b.psi) and np.array_equal(a.v, b.v)

    def test_hyperviscosity_damps(self, params, grid):
        start = FieldState.random(grid, rng_from_seed(4), amplitude=0.2)
        free = simulate(start, params, 0.01, 20, 20)
        damped = simulate(start, params, 0.01, 20, 20, hyperviscosity=1e-3)
        key = ConservedVectorId.ENERGY.value
        assert damped.integrals[-1][key] < free.integrals[-1][key]

    @pytest.mark.slow
    def test_random_energy_drift_128(self):
        params = PhysicalParams(9.81, 1.0, 2.0)
        g = Grid2D(128, 128)
        start = FieldState.random(g, rng_from_seed(11), amplitude=0.05)
        periods = 10 * 2 * math.pi / params.N
        dt = default_dt(start, params)
        n = math.ceil(periods / dt)
        traj = simulate(start, params, periods / n, n, n // 10)
        assert global_drift(ConservedVectorId.ENERGY, traj).max_relative_drift <= 1e-6
