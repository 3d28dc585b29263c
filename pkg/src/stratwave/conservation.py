"""Conserved vectors: densities, fluxes, divergence residuals and drift.

Three local conservation laws are exposed: the translation of ``v``, the
translation of ``rho`` and the energy obtained from the non-uniform dilation.
Time derivatives of densities are evaluated by the chain rule with the model
tendencies substituted, so the divergence identity can be checked pointwise
on a single snapshot.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .grid import FieldState, PhysicalParams, same_grid
from .model import Tendencies, Trajectory, rhs

__all__ = [
    "ConservedVectorId",
    "ConservedEval",
    "Characteristics",
    "DriftReport",
    "density_from_characteristics",
    "energy_density",
    "evaluate",
    "divergence_terms",
    "divergence_residual",
    "global_integrals",
    "global_drift",
    "dilation_divergence_terms",
    "energy_from_dilation_density",
]


class ConservedVectorId(enum.Enum):
    V_TRANSLATION = "v_translation"
    RHO_TRANSLATION = "rho_translation"
    ENERGY = "energy"


@dataclass(frozen=True, eq=False)
class ConservedEval:
    c1: np.ndarray
    c2: np.ndarray
    c3: np.ndarray


@dataclass(frozen=True, eq=False)
class Characteristics:
    """Characteristic triple ``(W1, W2, W3)`` for ``(v, rho, psi)``.

    ``w3_x`` and ``w3_z`` may be given when ``W3`` is not periodic (it then
    cannot be differentiated spectrally); otherwise they are computed.
    """

    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray
    w3_x: np.ndarray | None = None
    w3_z: np.ndarray | None = None


def density_from_characteristics(w: Characteristics, state: FieldState, params: PhysicalParams) -> np.ndarray:
    """Local density ``-v W1 - (g^2/N^2) rho W2 - psi_x D_x W3 - psi_z D_z W3``."""
    grid = state.grid
    w1, w2, w3 = (np.broadcast_to(np.asarray(a, dtype=float), grid.shape) for a in (w.w1, w.w2, w.w3))
    if w.w3_x is None or w.w3_z is None:
        w3_x, w3_z = grid.gradient(np.ascontiguousarray(w3))
    else:
        w3_x, w3_z = w.w3_x, w.w3_z
    psi_x, psi_z = grid.gradient(state.psi)
    return -state.v * w1 - params.buoyancy_weight * state.rho * w2 - psi_x * w3_x - psi_z * w3_z


def energy_density(state: FieldState, params: PhysicalParams) -> np.ndarray:
    psi_x, psi_z = state.grid.gradient(state.psi)
    return state.v**2 + params.buoyancy_weight * state.rho**2 + psi_x**2 + psi_z**2


def _tendencies(state, params, tendencies):
    return rhs(state, params) if tendencies is None else tendencies


def evaluate(
    vector: ConservedVectorId,
    state: FieldState,
    params: PhysicalParams,
    tendencies: Tendencies | None = None,
) -> ConservedEval:
    """Density and flux of ``vector``; the energy flux needs ``psi_t``."""
    grid = state.grid
    v, rho, psi = state.v, state.rho, state.psi
    psi_x, psi_z = grid.gradient(psi)
    g, f, N = params.g, params.f, params.N
    if vector is ConservedVectorId.V_TRANSLATION:
        return ConservedEval(v.copy(), v * psi_z, f * psi - v * psi_x)
    if vector is ConservedVectorId.RHO_TRANSLATION:
        return ConservedEval(rho.copy(), (N**2 / g) * psi + rho * psi_z, -rho * psi_x)
    if vector is ConservedVectorId.ENERGY:
        tend = _tendencies(state, params, tendencies)
        psi_xt, psi_zt = grid.gradient(tend.dpsi_dt)
        zeta_x, zeta_z = grid.gradient(state.zeta)
        w = params.buoyancy_weight
        c1 = v**2 + w * rho**2 + psi_x**2 + psi_z**2
        c2 = 2 * g * rho * psi + v**2 * psi_z + w * rho**2 * psi_z - 2 * psi * psi_xt + psi**2 * zeta_z
        c3 = 2 * f * v * psi - v**2 * psi_x - w * rho**2 * psi_x - 2 * psi * psi_zt - psi**2 * zeta_x
        return ConservedEval(c1, c2, c3)
    raise ValueError(f"unknown conserved vector {vector!r}")


def divergence_terms(
    vector: ConservedVectorId,
    state: FieldState,
    params: PhysicalParams,
    tendencies: Tendencies | None = None,
) -> list[np.ndarray]:
    """``[D_t C1, D_x C2, D_z C3]`` with ``D_t`` taken by the chain rule."""
    grid = state.grid
    tend = _tendencies(state, params, tendencies)
    ev = evaluate(vector, state, params, tend)
    if vector is ConservedVectorId.V_TRANSLATION:
        dt_c1 = grid.check(tend.dv_dt)
    elif vector is ConservedVectorId.RHO_TRANSLATION:
        dt_c1 = grid.check(tend.drho_dt)
    else:
        psi_x, psi_z = grid.gradient(state.psi)
        psi_xt, psi_zt = grid.gradient(tend.dpsi_dt)
        dt_c1 = 2 * (
            state.v * tend.dv_dt
            + params.buoyancy_weight * state.rho * tend.drho_dt
            + psi_x * psi_xt
            + psi_z * psi_zt
        )
    return [dt_c1, grid.dx_(ev.c2), grid.dz_(ev.c3)]


def divergence_residual(
    vector: ConservedVectorId,
    state: FieldState,
    params: PhysicalParams,
    tendencies: Tendencies | None = None,
) -> np.ndarray:
    """``D_t C1 + D_x C2 + D_z C3``; zero wherever ``tendencies`` come from :func:`rhs`."""
    return sum(divergence_terms(vector, state, params, tendencies))


def global_integrals(state: FieldState, params: PhysicalParams) -> dict[str, float]:
    grid = state.grid
    return {
        ConservedVectorId.V_TRANSLATION.value: grid.integrate(state.v),
        ConservedVectorId.RHO_TRANSLATION.value: grid.integrate(state.rho),
        ConservedVectorId.ENERGY.value: grid.integrate(energy_density(state, params)),
    }


def _density(vector: ConservedVectorId, state: FieldState, params: PhysicalParams) -> np.ndarray:
    if vector is ConservedVectorId.V_TRANSLATION:
        return state.v
    if vector is ConservedVectorId.RHO_TRANSLATION:
        return state.rho
    return energy_density(state, params)


@dataclass(frozen=True)
class DriftReport:
    """``max_relative_drift`` is ``max|I(t) - I(0)| / max(|I(0)|, integral of |C1(0)|)``."""

    vector: ConservedVectorId
    times: np.ndarray
    integrals: np.ndarray
    max_relative_drift: float


def global_drift(vector: ConservedVectorId, trajectory: Trajectory | list[FieldState], params: PhysicalParams | None = None) -> DriftReport:
    """Time series of the integrated density and its largest relative drift.

    The normalisation uses the integral of ``|C1|`` at the first snapshot so
    that densities with zero net integral (e.g. a zero-mean ``v``) still get a
    meaningful relative measure.
    """
    if isinstance(trajectory, Trajectory):
        states, params = trajectory.states, params or trajectory.params
    else:
        states = list(trajectory)
    if not states:
        raise ValueError("empty trajectory")
    if params is None:
        raise ValueError("params are required for a bare list of states")
    same_grid(*(s.grid for s in states))
    grid = states[0].grid
    integrals = np.array([grid.integrate(_density(vector, s, params)) for s in states])
    ref = max(abs(integrals[0]), grid.integrate(np.abs(_density(vector, states[0], params))))
    drift = np.abs(integrals - integrals[0])
    rel = float(np.max(drift) / ref) if ref > 0 else float(np.max(drift))
    return DriftReport(vector, np.array([s.t for s in states]), integrals, rel)


def dilation_divergence_terms(state: FieldState, params: PhysicalParams) -> np.ndarray:
    """Divergence part of the raw dilation density.

    Equals ``D_x(x Q/2) + D_z(z Q/2)`` with ``Q = v^2 + (g^2/N^2) rho^2 + |grad psi|^2``,
    expanded by the product rule because ``x Q`` is not periodic.
    """
    grid = state.grid
    X, Z = grid.coords
    q = energy_density(state, params)
    q_x, q_z = grid.gradient(q)
    return q + 0.5 * (X * q_x + Z * q_z)


def energy_from_dilation_density(c1: np.ndarray, state: FieldState, params: PhysicalParams) -> np.ndarray:
    """Strip the divergence terms from the dilation density and divide by -2."""
    return (np.asarray(c1) - dilation_divergence_terms(state, params)) / -2.0
