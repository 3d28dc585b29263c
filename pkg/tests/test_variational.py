"""Weak variational-derivative probes."""

import numpy as np
import pytest

from stratwave import variational as V
from stratwave.grid import Grid2D, rng_from_seed

from conftest import max_abs


class TestDirectionalVariation:
    def test_linear_functional(self, random_state, grid, rng):
        F = V.DensityFunctional("v", lambda g, v, rho, psi: v.copy())
        probe = grid.random_field(rng)
        assert V.directional_variation(F, random_state, "v", probe) == pytest.approx(grid.integrate(probe), rel=1e-9)

    def test_quadratic_functional(self, random_state, grid, rng):
        F = V.DensityFunctional("rho^2", lambda g, v, rho, psi: rho**2)
        probe = grid.random_field(rng)
        expected = grid.integrate(2 * random_state.rho * probe)
        assert V.directional_variation(F, random_state, "rho", probe) == pytest.approx(expected, rel=1e-9)

    def test_gradient_energy(self, random_state, grid, rng):
        # d/de integral |grad(psi + e p)|^2 = -2 integral lap(psi) p
        def dirichlet(g, v, rho, psi):
            px, pz = g.gradient(psi)
            return px**2 + pz**2

        F = V.DensityFunctional("|grad psi|^2", dirichlet)
        probe = grid.random_field(rng)
        expected = -2 * grid.integrate(random_state.zeta * probe)
        assert V.directional_variation(F, random_state, "psi", probe) == pytest.approx(expected, rel=1e-8)

    def test_zero_probe(self, random_state, grid):
        F = V.DensityFunctional("v", lambda g, v, rho, psi: v.copy())
        assert V.directional_variation(F, random_state, "v", np.zeros(grid.shape)) == 0.0

    def test_bad_slot(self, random_state, grid):
        F = V.DensityFunctional("v", lambda g, v, rho, psi: v.copy())
        with pytest.raises(ValueError):
            V.directional_variation(F, random_state, "zeta", np.zeros(grid.shape))

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_non_finite_functional(self, random_state, grid, rng):
        F = V.DensityFunctional("log", lambda g, v, rho, psi: np.log(v - 10))
        with pytest.raises(ValueError, match="non-finite"):
            V.directional_variation(F, random_state, "v", grid.random_field(rng))


class TestIsDivergence:
    @pytest.mark.parametrize("F, slot", V.identity_catalogue(), ids=lambda x: getattr(x, "name", x))
    def test_identities(self, F, slot):
        verdict = V.is_divergence(F, 8, seed=2, slots=[slot])
        assert verdict.passed, verdict

    def test_explicit_divergence(self):
        F = V.DensityFunctional("D_x(v rho psi)", lambda g, v, rho, psi: g.dx_(v * rho * psi))
        assert V.is_divergence(F, 8).passed

    @pytest.mark.parametrize(
        "F",
        [
            V.DensityFunctional("v^2", lambda g, v, rho, psi: v**2),
            V.DensityFunctional("psi J(v, rho)", lambda g, v, rho, psi: psi * g.jacobian(v, rho)),
            V.DensityFunctional("psi", lambda g, v, rho, psi: psi.copy()),
        ],
        ids=lambda F: F.name,
    )
    def test_detects_non_divergence(self, F):
        verdict = V.is_divergence(F, 8)
        assert not verdict.passed and verdict.max_relative > 1e-3

    def test_needs_enough_trials(self):
        F = V.DensityFunctional("v", lambda g, v, rho, psi: v.copy())
        with pytest.raises(ValueError):
            V.is_divergence(F, 4)

    def test_deterministic(self):
        F, slot = V.identity_catalogue()[3]
        a = V.is_divergence(F, 8, seed=5, slots=[slot])
        b = V.is_divergence(F, 8, seed=5, slots=[slot])
        assert a == b


class TestTriviality:
    def test_solution_states_solve_the_model(self, params):
        from stratwave.model import equation_residual_terms, rhs, term_scale

        for state in V.solution_states(params, 4, seed=1):
            tend = rhs(state, params)
            for terms in equation_residual_terms(state, params, tend.dv_dt, tend.drho_dt, tend.dzeta_dt):
                assert max_abs(sum(terms)) <= 1e-11 * term_scale(terms)

    @pytest.mark.parametrize("label", ["X3 psi-translation", "X4 time-translation", "X5 x-translation", "X6 z-translation", "v", "rho", "energy"])
    def test_catalogue_verdicts(self, params, label):
        F, trivial = V.density_catalogue(params)[label]
        verdict = V.is_trivial_density(F, params, 8, seed=3, grid=Grid2D(24, 24))
        assert verdict.passed == trivial, verdict
