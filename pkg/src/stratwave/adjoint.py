"""Adjoint system in the costate ``(phi, mu, r)`` and the self-adjoint substitution.

Costate time derivatives are supplied by the caller; nothing here integrates
the adjoint equations in time. Under ``phi = psi, mu = -v, r = -(g^2/N^2) rho``
the three adjoint residuals reduce to the original equation residuals times
``(1, 1, g^2/N^2)``:

* the coupling ``Theta`` vanishes identically, since ``J(-v, v) = 0``,
  ``J(rho, rho) = 0`` and the bracketed second-derivative combination is
  antisymmetric in ``(phi, psi)``;
* the first residual becomes ``zeta_t - g rho_x - f v_z - J(psi, zeta)``;
* the second becomes ``v_t + f psi_z - J(psi, v)``;
* the third becomes ``(g^2/N^2) (rho_t + (N^2/g) psi_x - J(psi, rho))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import FieldState, Grid2D, PhysicalParams, same_grid
from .model import Tendencies

__all__ = [
    "Costate",
    "CostateRates",
    "theta",
    "adjoint_residual_terms",
    "adjoint_residual",
    "self_adjoint_substitution",
    "substitute_rates",
    "equivalence_factors",
]


@dataclass(frozen=True, eq=False)
class Costate:
    grid: Grid2D
    phi: np.ndarray
    mu: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        for name in ("phi", "mu", "r"):
            object.__setattr__(self, name, self.grid.check(getattr(self, name)))


@dataclass(frozen=True, eq=False)
class CostateRates:
    """Time derivatives ``phi_t, mu_t, r_t`` and ``laplacian(phi_t)``."""

    phi_t: np.ndarray
    mu_t: np.ndarray
    r_t: np.ndarray
    lap_phi_t: np.ndarray | None = None


def _second_derivatives(grid: Grid2D, a: np.ndarray):
    coeffs = grid.fft(a)
    return (
        grid.ifft(-grid.kx**2 * coeffs),
        grid.ifft(grid.ikx * grid.ikz * coeffs),
        grid.ifft(-grid.kz**2 * coeffs),
    )


def _theta_terms(state: FieldState, costate: Costate) -> list[np.ndarray]:
    grid = same_grid(state.grid, costate.grid)
    phi_xx, phi_xz, phi_zz = _second_derivatives(grid, costate.phi)
    psi_xx, psi_xz, psi_zz = _second_derivatives(grid, state.psi)
    return [
        grid.jacobian(costate.mu, state.v),
        grid.jacobian(costate.r, state.rho),
        2 * phi_xz * psi_xx,
        2 * phi_zz * psi_xz,
        -2 * phi_xx * psi_xz,
        -2 * phi_xz * psi_zz,
    ]


def theta(state: FieldState, costate: Costate) -> np.ndarray:
    """``J(mu, v) + J(r, rho) + 2 [phi_xz psi_xx + phi_zz psi_xz - phi_xx psi_xz - phi_xz psi_zz]``."""
    return sum(_theta_terms(state, costate))


def adjoint_residual_terms(
    state: FieldState,
    costate: Costate,
    params: PhysicalParams,
    rates: CostateRates,
) -> tuple[list[np.ndarray], list[np.ndarray], list[np.ndarray]]:
    """Signed terms of the three adjoint equations (see :func:`adjoint_residual`)."""
    grid = same_grid(state.grid, costate.grid)
    g, f, N = params.g, params.f, params.N
    phi_x, phi_z = grid.gradient(costate.phi)
    mu_x, mu_z = grid.gradient(costate.mu)
    r_x, r_z = grid.gradient(costate.r)
    psi_x, psi_z = grid.gradient(state.psi)
    zeta_x, zeta_z = grid.gradient(state.zeta)
    lap_phi_t = grid.laplacian(rates.phi_t) if rates.lap_phi_t is None else grid.check(rates.lap_phi_t)
    first = [
        lap_phi_t,
        (N**2 / g) * r_x,
        f * mu_z,
        -phi_x * zeta_z,
        phi_z * zeta_x,
    ] + [-term for term in _theta_terms(state, costate)]
    second = [-grid.check(rates.mu_t), -mu_x * psi_z, f * phi_z, mu_z * psi_x]
    third = [-grid.check(rates.r_t), g * phi_x, -r_x * psi_z, r_z * psi_x]
    return first, second, third


def adjoint_residual(state, costate, params, rates):
    """Left-hand sides of the adjoint equations.

    1. ``lap(phi_t) + (N^2/g) r_x + f mu_z - phi_x lap(psi)_z + phi_z lap(psi)_x - Theta``
    2. ``-mu_t - mu_x psi_z + f phi_z + mu_z psi_x``
    3. ``-r_t + g phi_x - r_x psi_z + r_z psi_x``
    """
    return tuple(sum(terms) for terms in adjoint_residual_terms(state, costate, params, rates))


def self_adjoint_substitution(state: FieldState, params: PhysicalParams) -> Costate:
    """``phi = psi``, ``mu = -v``, ``r = -(g^2/N^2) rho``."""
    return Costate(state.grid, state.psi.copy(), -state.v, -params.buoyancy_weight * state.rho)


def substitute_rates(tendencies: Tendencies, params: PhysicalParams) -> CostateRates:
    """Apply the substitution to state time derivatives."""
    return CostateRates(
        phi_t=tendencies.dpsi_dt,
        mu_t=-tendencies.dv_dt,
        r_t=-params.buoyancy_weight * tendencies.drho_dt,
        lap_phi_t=tendencies.dzeta_dt,
    )


def equivalence_factors(params: PhysicalParams) -> tuple[float, float, float]:
    """Diagonal factors relating adjoint residuals to original residuals."""
    return (1.0, 1.0, params.buoyancy_weight)

