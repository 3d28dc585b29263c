"""Vorticity-form dynamics: tendencies, residuals and RK4 time stepping.

The prognostic variables are ``(v, rho, zeta)`` with ``zeta = laplacian(psi)``;
``psi`` is recovered diagnostically. Its spatial mean is a gauge constant
carried unchanged through time.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import FieldState, Grid2D, PhysicalParams

log = logging.getLogger(__name__)

__all__ = [
    "Tendencies",
    "BlowUpError",
    "Trajectory",
    "rhs",
    "equation_residual_terms",
    "equation_residuals",
    "step_rk4",
    "simulate",
    "default_dt",
]


class BlowUpError(RuntimeError):
    """Raised when a non-finite value appears; ``trajectory`` holds what was saved."""

    def __init__(self, t: float, trajectory: "Trajectory | None" = None):
        super().__init__(f"blow-up detected at t={t!r}")
        self.t = t
        self.trajectory = trajectory


@dataclass(frozen=True, eq=False)
class Tendencies:
    dv_dt: np.ndarray
    drho_dt: np.ndarray
    dzeta_dt: np.ndarray
    dpsi_dt: np.ndarray


def _require_finite(t: float, *arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise BlowUpError(t)


def rhs(state: FieldState, params: PhysicalParams) -> Tendencies:
    """Undealiased tendencies of ``(v, rho, zeta, psi)`` for ``state``.

    ``dpsi_dt`` is the zero-mean inverse Laplacian of ``dzeta_dt``.
    """
    grid = state.grid
    g, f, N = params.g, params.f, params.N
    psi_h = grid.fft(state.psi)
    v_h = grid.fft(state.v)
    rho_h = grid.fft(state.rho)
    zeta_h = -grid.k2 * psi_h

    psi_x, psi_z = grid.ifft(grid.ikx * psi_h), grid.ifft(grid.ikz * psi_h)
    v_x, v_z = grid.ifft(grid.ikx * v_h), grid.ifft(grid.ikz * v_h)
    rho_x, rho_z = grid.ifft(grid.ikx * rho_h), grid.ifft(grid.ikz * rho_h)
    zeta_x, zeta_z = grid.ifft(grid.ikx * zeta_h), grid.ifft(grid.ikz * zeta_h)

    dzeta = (psi_x * zeta_z - psi_z * zeta_x) + g * rho_x + f * v_z
    dv = (psi_x * v_z - psi_z * v_x) - f * psi_z
    drho = (psi_x * rho_z - psi_z * rho_x) - (N**2 / g) * psi_x
    _require_finite(state.t, dzeta, dv, drho)
    dpsi = grid.ifft(-grid.inv_k2 * grid.fft(dzeta))
    return Tendencies(dv, drho, dzeta, dpsi)


def equation_residual_terms(
    state: FieldState,
    params: PhysicalParams,
    v_t: np.ndarray,
    rho_t: np.ndarray,
    zeta_t: np.ndarray,
) -> tuple[list[np.ndarray], list[np.ndarray], list[np.ndarray]]:
    """Signed terms of the three equations written as ``lhs - rhs``.

    Summing each list gives the residual; the largest term magnitude is the
    natural scale against which a residual is judged.
    """
    grid = state.grid
    g, f, N = params.g, params.f, params.N
    psi_x, psi_z = grid.gradient(state.psi)
    v_x, v_z = grid.gradient(state.v)
    rho_x, rho_z = grid.gradient(state.rho)
    zeta_x, zeta_z = grid.gradient(state.zeta)
    vorticity = [grid.check(zeta_t), -g * rho_x, -f * v_z, -psi_x * zeta_z, psi_z * zeta_x]
    along_flow = [grid.check(v_t), f * psi_z, -psi_x * v_z, psi_z * v_x]
    density = [grid.check(rho_t), (N**2 / g) * psi_x, -psi_x * rho_z, psi_z * rho_x]
    return vorticity, along_flow, density


def equation_residuals(state, params, v_t, rho_t, zeta_t):
    return tuple(sum(terms) for terms in equation_residual_terms(state, params, v_t, rho_t, zeta_t))


def term_scale(terms) -> float:
    return max(float(np.max(np.abs(t))) for t in terms)


def default_dt(state: FieldState, params: PhysicalParams) -> float:
    """``0.1 min(dx, dz) / max(N, |f|, U)`` with ``U`` the peak flow speed."""
    psi_x, psi_z = state.grid.gradient(state.psi)
    speed = float(np.max(np.hypot(psi_x, psi_z)))
    rate = max(params.N, abs(params.f), speed)
    return 0.1 * min(state.grid.dx, state.grid.dz) / rate


class _SpectralRK4:
    """RK4 on the Fourier coefficients of ``(v, rho, zeta)``."""

    def __init__(self, grid: Grid2D, params: PhysicalParams, dealias: bool = True, hyperviscosity: float = 0.0):
        self.grid = grid
        self.params = params
        self.mask = grid.dealias_mask if dealias else None
        self.damping = -hyperviscosity * grid.k2**2 if hyperviscosity else None

    def _bracket(self, a_x, a_z, b_h):
        grid = self.grid
        prod = grid.fft(a_x * grid.ifft(grid.ikz * b_h) - a_z * grid.ifft(grid.ikx * b_h))
        return prod * self.mask if self.mask is not None else prod

    def tendency(self, v_h, rho_h, zeta_h):
        grid, p = self.grid, self.params
        psi_h = -grid.inv_k2 * zeta_h
        psi_x = grid.ifft(grid.ikx * psi_h)
        psi_z = grid.ifft(grid.ikz * psi_h)
        dv = self._bracket(psi_x, psi_z, v_h) - p.f * grid.ikz * psi_h
        drho = self._bracket(psi_x, psi_z, rho_h) - (p.N**2 / p.g) * grid.ikx * psi_h
        dzeta = self._bracket(psi_x, psi_z, zeta_h) + p.g * grid.ikx * rho_h + p.f * grid.ikz * v_h
        if self.damping is not None:
            dv = dv + self.damping * v_h
            drho = drho + self.damping * rho_h
            dzeta = dzeta + self.damping * zeta_h
        return dv, drho, dzeta

    def step(self, y, dt):
        k1 = self.tendency(*y)
        k2 = self.tendency(*(a + 0.5 * dt * b for a, b in zip(y, k1)))
        k3 = self.tendency(*(a + 0.5 * dt * b for a, b in zip(y, k2)))
        k4 = self.tendency(*(a + dt * b for a, b in zip(y, k3)))
        return tuple(a + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))

    def to_spectral(self, state: FieldState):
        grid = self.grid
        return grid.fft(state.v), grid.fft(state.rho), -grid.k2 * grid.fft(state.psi)

    def to_state(self, y, t: float, psi_mean: float) -> FieldState:
        grid = self.grid
        v_h, rho_h, zeta_h = y
        psi = grid.ifft(-grid.inv_k2 * zeta_h) + psi_mean
        return FieldState(grid, grid.ifft(v_h), grid.ifft(rho_h), psi, t)


def _finite(y) -> bool:
    return all(np.all(np.isfinite(a)) for a in y)


def step_rk4(
    state: FieldState,
    params: PhysicalParams,
    dt: float,
    dealias: bool = True,
    hyperviscosity: float = 0.0,
) -> FieldState:
    """Advance ``state`` by one classical RK4 step of size ``dt``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    stepper = _SpectralRK4(state.grid, params, dealias, hyperviscosity)
    y = stepper.step(stepper.to_spectral(state), dt)
    if not _finite(y):
        raise BlowUpError(state.t + dt)
    return stepper.to_state(y, state.t + dt, float(np.mean(state.psi)))


@dataclass
class Trajectory:
    """Snapshots of a run with the global integrals recorded at each one."""

    params: PhysicalParams
    states: list[FieldState] = field(default_factory=list)
    integrals: list[dict[str, float]] = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def __len__(self):
        return len(self.states)


def simulate(
    initial: FieldState,
    params: PhysicalParams,
    dt: float | None,
    n_steps: int,
    snapshot_every: int = 1,
    callback: Callable[[FieldState], None] | None = None,
    dealias: bool = True,
    hyperviscosity: float = 0.0,
) -> Trajectory:
    """Integrate ``n_steps`` RK4 steps, keeping every ``snapshot_every``-th state.

    ``dt=None`` selects :func:`default_dt`. A step that produces non-finite
    values is retried once as two half steps; if that also fails a
    :class:`BlowUpError` carrying the partial trajectory is raised.
    ``callback`` is invoked synchronously with each snapshot.
    """
    from .conservation import global_integrals

    if n_steps < 0:
        raise ValueError(f"n_steps must be >= 0, got {n_steps!r}")
    if snapshot_every < 1:
        raise ValueError(f"snapshot_every must be >= 1, got {snapshot_every!r}")
    if dt is None:
        dt = default_dt(initial, params)
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")

    trajectory = Trajectory(params)

    def record(state):
        trajectory.states.append(state)
        trajectory.integrals.append(global_integrals(state, params))
        if callback is not None:
            callback(state)

    stepper = _SpectralRK4(initial.grid, params, dealias, hyperviscosity)
    psi_mean = float(np.mean(initial.psi))
    record(initial)
    y = stepper.to_spectral(initial)
    for n in range(1, n_steps + 1):
        t = initial.t + n * dt
        y_next = stepper.step(y, dt)
        if not _finite(y_next):
            log.warning("non-finite values at t=%g, retrying with dt/2", t)
            y_next = stepper.step(stepper.step(y, 0.5 * dt), 0.5 * dt)
            if not _finite(y_next):
                raise BlowUpError(t, trajectory)
        y = y_next
        if n % snapshot_every == 0:
            record(stepper.to_state(y, t, psi_mean))
    return trajectory
