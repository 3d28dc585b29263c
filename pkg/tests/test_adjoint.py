"""Adjoint system: the coupling term, the substitution and the equivalence factors."""

import numpy as np
import pytest

from stratwave import adjoint, variational
from stratwave.adjoint import (
    Costate,
    CostateRates,
    adjoint_residual,
    equivalence_factors,
    self_adjoint_substitution,
    substitute_rates,
    theta,
)
from stratwave.grid import FieldState, Grid2D, GridMismatchError, rng_from_seed
from stratwave.model import equation_residual_terms, equation_residuals, rhs, term_scale
from stratwave.verify import adjoint_discrepancies

from conftest import max_abs


def random_costate(grid, rng):
    return Costate(grid, *(grid.random_field(rng) for _ in range(3)))


def zero_rates(grid):
    z = np.zeros(grid.shape)
    return CostateRates(z, z, z, lap_phi_t=z)


class TestTheta:
    def test_vanishes_under_substitution(self, params):
        grid = Grid2D(64, 64)
        rng = rng_from_seed(0)
        for _ in range(4):
            state = FieldState.random(grid, rng)
            terms = adjoint._theta_terms(state, self_adjoint_substitution(state, params))
            assert max_abs(sum(terms)) <= 1e-11 * term_scale(terms)

    def test_nonzero_for_generic_costate(self, random_state, grid, rng):
        assert max_abs(theta(random_state, random_costate(grid, rng))) > 1e-3

    def test_bilinear_in_costate(self, random_state, grid, rng):
        a, b = random_costate(grid, rng), random_costate(grid, rng)
        ab = Costate(grid, a.phi + 2 * b.phi, a.mu + 2 * b.mu, a.r + 2 * b.r)
        lhs = theta(random_state, ab)
        rhs_ = theta(random_state, a) + 2 * theta(random_state, b)
        assert max_abs(lhs - rhs_) < 1e-12 * max_abs(lhs)

    def test_grid_mismatch(self, random_state, rng):
        other = Grid2D(16, 16)
        with pytest.raises(GridMismatchError):
            theta(random_state, random_costate(other, rng))


class TestSubstitution:
    def test_costate_values(self, random_state, params):
        c = self_adjoint_substitution(random_state, params)
        assert np.array_equal(c.phi, random_state.psi)
        assert np.array_equal(c.mu, -random_state.v)
        assert np.allclose(c.r, -(params.g**2 / params.N**2) * random_state.rho)

    def test_factors(self, params):
        assert equivalence_factors(params) == (1.0, 1.0, pytest.approx(params.g**2 / params.N**2))

    def test_adjoint_residuals_are_scaled_originals(self, params):
        grid = Grid2D(64, 64)
        rng = rng_from_seed(1)
        for _ in range(4):
            state = FieldState.random(grid, rng)
            rates = tuple(grid.random_field(rng) for _ in range(3))
            th, mismatch = adjoint_discrepancies(state, params, rates)
            assert th <= 1e-11
            assert max(mismatch) <= 1e-10

    def test_solutions_solve_the_adjoint_system(self, random_state, params):
        tend = rhs(random_state, params)
        costate = self_adjoint_substitution(random_state, params)
        groups = adjoint.adjoint_residual_terms(random_state, costate, params, substitute_rates(tend, params))
        for terms in groups:
            assert max_abs(sum(terms)) <= 1e-11 * term_scale(terms)


class TestWeakVariation:
    """Adjoint equations against directional derivatives of the spatial Lagrangian.

    With all time derivatives dropped, ``L = phi E1 + mu E2 + r E3`` has
    variational derivatives equal to the spatial parts of the adjoint
    equations; the time-derivative terms follow from one integration by parts.
    """

    @pytest.fixture
    def setup(self, params):
        grid = Grid2D(32, 32)
        rng = rng_from_seed(3)
        state = FieldState.random(grid, rng)
        costate = random_costate(grid, rng)
        zero = np.zeros(grid.shape)

        def lagrangian(g, v, rho, psi):
            e1, e2, e3 = equation_residuals(FieldState(g, v, rho, psi), params, zero, zero, zero)
            return costate.phi * e1 + costate.mu * e2 + costate.r * e3

        L = variational.DensityFunctional("L", lagrangian)
        residuals = adjoint_residual(state, costate, params, zero_rates(grid))
        return grid, rng, state, costate, L, residuals

    @pytest.mark.parametrize("slot, index", [("v", 1), ("rho", 2)])
    def test_mu_and_r_equations(self, setup, slot, index):
        grid, rng, state, _, L, residuals = setup
        for _ in range(3):
            probe = grid.random_field(rng)
            weak = variational.directional_variation(L, state, slot, probe)
            strong = grid.integrate(residuals[index] * probe)
            assert weak == pytest.approx(strong, rel=1e-6, abs=1e-6 * grid.integrate(np.abs(residuals[index] * probe)))

    def test_phi_equation_differs_by_bracket_difference(self, setup):
        # The vorticity adjoint equation as implemented differs from minus the
        # variational derivative in psi by J(psi, lap phi) - J(phi, lap psi);
        # that difference vanishes identically once phi = psi.
        grid, rng, state, costate, L, residuals = setup
        diff = grid.jacobian(state.psi, grid.laplacian(costate.phi)) - grid.jacobian(costate.phi, state.zeta)
        probe = grid.random_field(rng)
        weak = variational.directional_variation(L, state, "psi", probe)
        corrected = -grid.integrate((residuals[0] - diff) * probe)
        printed = -grid.integrate(residuals[0] * probe)
        scale = grid.integrate(np.abs(residuals[0] * probe))
        assert abs(weak - corrected) <= 1e-6 * scale
        assert abs(weak - printed) > 1e-3 * scale


class TestResidualShapes:
    def test_three_fields(self, random_state, params, grid, rng):
        out = adjoint_residual(random_state, random_costate(grid, rng), params, zero_rates(grid))
        assert len(out) == 3 and all(a.shape == grid.shape for a in out)

    def test_lap_phi_t_defaults_to_laplacian(self, random_state, params, grid, rng):
        c = random_costate(grid, rng)
        phi_t = grid.random_field(rng)
        z = np.zeros(grid.shape)
        a = adjoint_residual(random_state, c, params, CostateRates(phi_t, z, z))
        b = adjoint_residual(random_state, c, params, CostateRates(phi_t, z, z, lap_phi_t=grid.laplacian(phi_t)))
        assert np.array_equal(a[0], b[0])

    def test_original_residual_terms_sum(self, random_state, params, grid, rng):
        rates = tuple(grid.random_field(rng) for _ in range(3))
        groups = equation_residual_terms(random_state, params, *rates)
        for total, terms in zip(equation_residuals(random_state, params, *rates), groups):
            assert np.array_equal(total, sum(terms))
