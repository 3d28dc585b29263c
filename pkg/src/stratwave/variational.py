"""Weak variational-derivative probes for divergence and triviality tests.

A density ``F(v, rho, psi, ...)`` is a total divergence exactly when all its
variational derivatives vanish. On the periodic grid that is probed weakly:
the directional derivative of ``integral F`` along any band-limited probe
must be zero. Densities of conservation laws are tested on solutions, with
time derivatives replaced by the model tendencies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .grid import FieldState, Grid2D, PhysicalParams, rng_from_seed
from .model import rhs, simulate

__all__ = [
    "DensityFunctional",
    "Verdict",
    "variation_field",
    "directional_variation",
    "relative_variation",
    "is_divergence",
    "is_trivial_density",
    "solution_states",
    "identity_catalogue",
    "density_catalogue",
]

SLOTS = ("v", "rho", "psi")
EPS = 1e-6


@dataclass(frozen=True)
class DensityFunctional:
    """``evaluate(grid, v, rho, psi)`` returns the density field."""

    name: str
    evaluate: Callable[[Grid2D, np.ndarray, np.ndarray, np.ndarray], np.ndarray]

    def __call__(self, state: FieldState) -> np.ndarray:
        return self.evaluate(state.grid, state.v, state.rho, state.psi)


def _perturbed(state: FieldState, slot: str, probe: np.ndarray, eps: float) -> FieldState:
    return state.replace(**{slot: getattr(state, slot) + eps * probe})


def _step(state: FieldState, slot: str, probe: np.ndarray) -> float:
    field_scale = float(np.max(np.abs(getattr(state, slot))))
    probe_scale = float(np.max(np.abs(probe)))
    if probe_scale == 0:
        return 0.0
    return EPS * (field_scale if field_scale > 0 else 1.0) / probe_scale


def variation_field(F: DensityFunctional, fields: FieldState, direction: str, probe: np.ndarray) -> np.ndarray:
    """Pointwise ``d/de F(fields + e probe)`` at ``e = 0`` in slot ``direction``.

    Central differences at ``h`` and ``h/2`` combined by one Richardson step,
    with ``h = 1e-6`` times the field scale over the probe scale.
    """
    if direction not in SLOTS:
        raise ValueError(f"direction must be one of {SLOTS}, got {direction!r}")
    probe = fields.grid.check(probe)
    h = _step(fields, direction, probe)
    if h == 0:
        return np.zeros(fields.grid.shape)

    def density(eps):
        value = F(_perturbed(fields, direction, probe, eps))
        if not np.all(np.isfinite(value)):
            raise ValueError(f"non-finite value of functional {F.name!r}")
        return value

    coarse = (density(h) - density(-h)) / (2 * h)
    fine = (density(h / 2) - density(-h / 2)) / h
    return (4 * fine - coarse) / 3


def directional_variation(F: DensityFunctional, fields: FieldState, direction: str, probe: np.ndarray) -> float:
    """Gateaux derivative of ``integral F`` along ``probe`` in slot ``direction``."""
    return fields.grid.integrate(variation_field(F, fields, direction, probe))


def relative_variation(F, fields, direction, probe) -> float:
    """``|integral dF| / integral |dF|`` for the pointwise variation ``dF``.

    Near zero when the variation integrates away (a divergence), of order one
    otherwise.
    """
    dF = variation_field(F, fields, direction, probe)
    grid = fields.grid
    scale = grid.integrate(np.abs(dF))
    if scale == 0:
        return 0.0
    return abs(grid.integrate(dF)) / scale


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    max_relative: float
    tol: float
    n_trials: int


def _random_states(grid, rng, n):
    for _ in range(n):
        yield FieldState.random(grid, rng)


def is_divergence(
    F: DensityFunctional,
    n_trials: int = 16,
    seed: int = 0,
    tol: float = 1e-7,
    grid: Grid2D | None = None,
    slots: Iterable[str] = SLOTS,
    states: Iterable[FieldState] | None = None,
) -> Verdict:
    """True iff every relative directional variation is ``<= tol``.

    Each trial draws a base state (random band-limited unless ``states`` is
    given) and one fresh probe per slot. Probes carry a mean component, so a
    density with non-zero net integral is always detected.
    """
    if n_trials < 8:
        raise ValueError(f"n_trials must be >= 8, got {n_trials}")
    grid = grid or Grid2D(32, 32)
    rng = rng_from_seed(seed)
    slots = tuple(slots)
    bases = list(states) if states is not None else list(_random_states(grid, rng, n_trials))
    if len(bases) < n_trials:
        raise ValueError(f"need {n_trials} base states, got {len(bases)}")
    worst = 0.0
    for state in bases[:n_trials]:
        for slot in slots:
            probe = state.grid.random_field(rng)
            worst = max(worst, relative_variation(F, state, slot, probe))
    return Verdict(F.name, worst <= tol, worst, tol, n_trials)


def solution_states(params: PhysicalParams, n: int, seed: int = 0, grid: Grid2D | None = None) -> list[FieldState]:
    """States lying on solutions: plane-wave beams at random phases, and short runs.

    Even entries are sampled travelling waves with random integer wave
    vectors and amplitudes; odd entries are random small-amplitude initial
    data advanced a few RK4 steps.
    """
    from .exact import WaveVector, beam_solution, plane_wave_beam

    grid = grid or Grid2D(32, 32)
    rng = rng_from_seed(seed + 7919)
    kx_max, kz_max = grid.band_limit()
    out = []
    for i in range(n):
        if i % 2 == 0:
            k, m = 0, 0
            while k == 0 and m == 0:
                k, m = int(rng.integers(-kx_max, kx_max + 1)), int(rng.integers(0, kz_max + 1))
            spec = plane_wave_beam(WaveVector(k * 2 * np.pi / grid.Lx, m * 2 * np.pi / grid.Lz), rng.uniform(0.5, 2))
            out.append(beam_solution(spec, params).sample(grid, rng.uniform(0, 10)))
        else:
            start = FieldState.random(grid, rng, amplitude=0.1)
            out.append(simulate(start, params, 0.01, 5, 5).states[-1])
    return out


def is_trivial_density(
    C1: DensityFunctional,
    params: PhysicalParams,
    n_trials: int = 16,
    seed: int = 0,
    tol: float = 1e-7,
    grid: Grid2D | None = None,
) -> Verdict:
    """Apply :func:`is_divergence` to ``C1`` at base states drawn from solutions.

    Densities involving time derivatives must be built with the tendencies
    substituted (see :func:`density_catalogue`).
    """
    states = solution_states(params, n_trials, seed, grid)
    return is_divergence(C1, n_trials, seed, tol, grid or states[0].grid, states=states)


# -- catalogues ------------------------------------------------------------------


def _J(grid, a, b):
    return grid.jacobian(a, b)


def identity_catalogue() -> list[tuple[DensityFunctional, str]]:
    """Jacobian expressions with vanishing variational derivative, paired with the slot."""
    jv = DensityFunctional("J(psi,v)", lambda g, v, rho, psi: _J(g, psi, v))
    vjv = DensityFunctional("v*J(psi,v)", lambda g, v, rho, psi: v * _J(g, psi, v))
    rjr = DensityFunctional("rho*J(psi,rho)", lambda g, v, rho, psi: rho * _J(g, psi, rho))
    jz = DensityFunctional("J(psi,lap psi)", lambda g, v, rho, psi: _J(g, psi, g.laplacian(psi)))
    pjz = DensityFunctional("psi*J(psi,lap psi)", lambda g, v, rho, psi: psi * _J(g, psi, g.laplacian(psi)))
    return [
        (jv, "v"),
        (jv, "psi"),
        (vjv, "v"),
        (vjv, "psi"),
        (rjr, "rho"),
        (rjr, "psi"),
        (jz, "psi"),
        (pjz, "psi"),
    ]


def density_catalogue(params: PhysicalParams) -> dict[str, tuple[DensityFunctional, bool]]:
    """Densities from the obvious symmetries and whether each is trivial.

    Time derivatives inside a density are replaced by :func:`~stratwave.model.rhs`.
    """
    w = params.buoyancy_weight

    def time_translation(g, v, rho, psi):
        tend = rhs(FieldState(g, v, rho, psi), params)
        psi_x, psi_z = g.gradient(psi)
        psi_xt, psi_zt = g.gradient(tend.dpsi_dt)
        return v * tend.dv_dt + w * rho * tend.drho_dt + psi_x * psi_xt + psi_z * psi_zt

    def translation(axis):
        def density(g, v, rho, psi):
            psi_x, psi_z = g.gradient(psi)
            psi_d1, psi_d2 = g.gradient(g.diff(psi, axis))
            return v * g.diff(v, axis) + w * rho * g.diff(rho, axis) + psi_x * psi_d1 + psi_z * psi_d2

        return density

    def energy(g, v, rho, psi):
        psi_x, psi_z = g.gradient(psi)
        return v**2 + w * rho**2 + psi_x**2 + psi_z**2

    return {
        "X3 psi-translation": (DensityFunctional("0", lambda g, v, rho, psi: np.zeros(g.shape)), True),
        "X4 time-translation": (DensityFunctional("v v_t + ...", time_translation), True),
        "X5 x-translation": (DensityFunctional("v v_x + ...", translation("x")), True),
        "X6 z-translation": (DensityFunctional("v v_z + ...", translation("z")), True),
        "v": (DensityFunctional("v", lambda g, v, rho, psi: v.copy()), False),
        "rho": (DensityFunctional("rho", lambda g, v, rho, psi: rho.copy()), False),
        "energy": (DensityFunctional("E", energy), False),
    }
