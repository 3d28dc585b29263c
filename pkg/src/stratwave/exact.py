"""Closed-form solutions depending on ``lambda = k x + m z`` and time.

Every solution is an :class:`AnalyticSolution`: an evaluator returning the
fields and all derivatives the equations need, computed from analytic
derivative callbacks (never by numerical differentiation). These serve as
oracles for the solver and as demo content.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import FieldState, Grid2D, PhysicalParams

__all__ = [
    "WaveVector",
    "Envelope",
    "BeamSpec",
    "InvariantSolutionParams",
    "AnalyticSolution",
    "ConstraintError",
    "omega",
    "beam_solution",
    "invariant_solution",
    "lorentzian_beam",
    "plane_wave_beam",
    "beam_energy_density",
    "beam_energy_at",
    "ode_reduction_oracle",
    "pde_residual_terms",
    "pde_residuals",
    "cosine",
    "sine",
    "gaussian",
    "polynomial",
    "zero",
]

DERIVATIVE_KEYS = (
    "psi", "psi_x", "psi_z", "psi_xx", "psi_xz", "psi_zz",
    "psi_xxx", "psi_xxz", "psi_xzz", "psi_zzz",
    "psi_t", "psi_xt", "psi_zt", "psi_xxt", "psi_zzt",
    "v", "v_x", "v_z", "v_t",
    "rho", "rho_x", "rho_z", "rho_t",
)  # fmt: skip


class ConstraintError(ValueError):
    pass


@dataclass(frozen=True)
class WaveVector:
    k: float
    m: float

    def __post_init__(self):
        if self.k == 0 and self.m == 0:
            raise ValueError("wave vector (k, m) must be non-zero")

    @property
    def norm2(self) -> float:
        return self.k**2 + self.m**2

    def phase(self, x, z):
        return self.k * np.asarray(x, dtype=float) + self.m * np.asarray(z, dtype=float)


def omega(wave: WaveVector, params: PhysicalParams) -> float:
    """Positive frequency with ``omega^2 = (k^2 N^2 + m^2 f^2) / (k^2 + m^2)``."""
    if wave.k == 0 and wave.m == 0:
        raise ValueError("wave vector (k, m) must be non-zero")
    k, m = wave.k, wave.m
    return math.sqrt((k * k * params.N**2 + m * m * params.f**2) / (k * k + m * m))


# -- envelopes -----------------------------------------------------------------


@dataclass(frozen=True)
class Envelope:
    """A function of ``lambda`` with analytic derivatives up to ``len(derivs) - 1``."""

    name: str
    derivs: tuple[Callable[[np.ndarray], np.ndarray], ...]

    def __call__(self, lam, order: int = 0):
        if order >= len(self.derivs):
            raise ValueError(f"envelope {self.name!r} has no derivative of order {order}")
        lam = np.asarray(lam, dtype=float)
        return np.broadcast_to(self.derivs[order](lam), lam.shape).astype(float)

    def scaled(self, c: float) -> "Envelope":
        return Envelope(f"{c!r}*{self.name}", tuple((lambda d: lambda s: c * d(s))(d) for d in self.derivs))


def cosine(amplitude: float = 1.0) -> Envelope:
    a = amplitude
    return Envelope(
        "cos",
        (lambda s: a * np.cos(s), lambda s: -a * np.sin(s), lambda s: -a * np.cos(s), lambda s: a * np.sin(s)),
    )


def sine(amplitude: float = 1.0) -> Envelope:
    a = amplitude
    return Envelope(
        "sin",
        (lambda s: a * np.sin(s), lambda s: a * np.cos(s), lambda s: -a * np.sin(s), lambda s: -a * np.cos(s)),
    )


def lorentzian_even(a: float) -> Envelope:
    """``a / (1 + s^2)``."""
    return Envelope(
        "lorentzian_even",
        (
            lambda s: a / (1 + s**2),
            lambda s: -2 * a * s / (1 + s**2) ** 2,
            lambda s: a * (6 * s**2 - 2) / (1 + s**2) ** 3,
            lambda s: 24 * a * s * (1 - s**2) / (1 + s**2) ** 4,
        ),
    )


def lorentzian_odd(a: float) -> Envelope:
    """``a s / (1 + s^2)``."""
    return Envelope(
        "lorentzian_odd",
        (
            lambda s: a * s / (1 + s**2),
            lambda s: a * (1 - s**2) / (1 + s**2) ** 2,
            lambda s: 2 * a * s * (s**2 - 3) / (1 + s**2) ** 3,
            lambda s: -6 * a * (s**4 - 6 * s**2 + 1) / (1 + s**2) ** 4,
        ),
    )


def gaussian(amplitude: float = 1.0, width: float = 1.0, center: float = 0.0) -> Envelope:
    """``amplitude * exp(-(s - center)^2 / (2 width^2))``."""
    a, w, c = amplitude, width, center

    def base(s):
        return a * np.exp(-((s - c) ** 2) / (2 * w * w))

    return Envelope(
        "gaussian",
        (
            base,
            lambda s: -(s - c) / w**2 * base(s),
            lambda s: ((s - c) ** 2 - w**2) / w**4 * base(s),
            lambda s: -(s - c) * ((s - c) ** 2 - 3 * w**2) / w**6 * base(s),
        ),
    )


def polynomial(coeffs: Sequence[float]) -> Envelope:
    """``sum(coeffs[i] * s**i)`` with exact derivatives."""
    p = np.polynomial.Polynomial(list(coeffs))
    return Envelope("polynomial", tuple(p.deriv(n) for n in range(4)))


def zero() -> Envelope:
    return polynomial([0.0])


# -- solution families ---------------------------------------------------------


@dataclass(frozen=True)
class BeamSpec:
    """Envelopes ``A, B`` and mean profiles ``F, H`` of a generalised invariant solution."""

    wave: WaveVector
    A: Envelope
    B: Envelope
    F: Envelope
    H: Envelope

    def constraint_residual(self, params: PhysicalParams, lam) -> tuple[np.ndarray, np.ndarray]:
        """``g k H' + f m F'`` and the magnitude of its two terms."""
        gk_h = params.g * self.wave.k * self.H(lam, 1)
        fm_f = params.f * self.wave.m * self.F(lam, 1)
        return gk_h + fm_f, np.maximum(np.abs(gk_h), np.abs(fm_f))


class AnalyticSolution:
    """Evaluator for ``(v, rho, psi)`` and their derivatives at ``(t, x, z)``."""

    name = "analytic"

    def evaluate(self, t, x, z) -> dict[str, np.ndarray]:
        raise NotImplementedError

    def fields(self, t, x, z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        d = self.evaluate(t, x, z)
        return d["v"], d["rho"], d["psi"]

    def sample(self, grid: Grid2D, t: float = 0.0) -> FieldState:
        X, Z = grid.coords
        v, rho, psi = self.fields(t, X, Z)
        return FieldState(grid, v, rho, psi, t)


def _broadcast(t, x, z):
    t, x, z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (t, x, z)))
    return t, x, z


class BeamSolution(AnalyticSolution):
    """``psi = A cos(wt) + B sin(wt)`` with the matching ``v`` and ``rho``."""

    name = "beam"

    def __init__(self, spec: BeamSpec, params: PhysicalParams):
        self.spec = spec
        self.params = params
        self.omega = omega(spec.wave, params)

    def evaluate(self, t, x, z):
        spec, p, w = self.spec, self.params, self.omega
        k, m = spec.wave.k, spec.wave.m
        t, x, z = _broadcast(t, x, z)
        lam = k * x + m * z
        c, s = np.cos(w * t), np.sin(w * t)
        A = [spec.A(lam, n) for n in range(4)]
        B = [spec.B(lam, n) for n in range(4)]
        # n-th lambda-derivative of psi and of psi_t
        P = [A[n] * c + B[n] * s for n in range(4)]
        Pt = [w * (B[n] * c - A[n] * s) for n in range(3)]
        # v, rho oscillating part S(lambda, t) = B' cos - A' sin and its derivatives
        S = [B[n + 1] * c - A[n + 1] * s for n in range(2)]
        St = -w * (A[1] * c + B[1] * s)
        cv = p.f * m / w
        cr = k * p.N**2 / (p.g * w)
        F1, H1 = spec.F(lam, 1), spec.H(lam, 1)
        return {
            "psi": P[0],
            "psi_x": k * P[1],
            "psi_z": m * P[1],
            "psi_xx": k * k * P[2],
            "psi_xz": k * m * P[2],
            "psi_zz": m * m * P[2],
            "psi_xxx": k**3 * P[3],
            "psi_xxz": k * k * m * P[3],
            "psi_xzz": k * m * m * P[3],
            "psi_zzz": m**3 * P[3],
            "psi_t": Pt[0],
            "psi_xt": k * Pt[1],
            "psi_zt": m * Pt[1],
            "psi_xxt": k * k * Pt[2],
            "psi_zzt": m * m * Pt[2],
            "v": cv * S[0] + spec.F(lam),
            "v_x": k * (cv * S[1] + F1),
            "v_z": m * (cv * S[1] + F1),
            "v_t": cv * St,
            "rho": cr * S[0] + spec.H(lam),
            "rho_x": k * (cr * S[1] + H1),
            "rho_z": m * (cr * S[1] + H1),
            "rho_t": cr * St,
        }


CONSTRAINT_PROBES = np.linspace(-10.0, 10.0, 81)


def beam_solution(spec: BeamSpec, params: PhysicalParams, check: bool = True) -> BeamSolution:
    """Solution built from ``spec``; the mean profiles must satisfy ``g k H' + f m F' = 0``."""
    if check:
        res, scale = spec.constraint_residual(params, CONSTRAINT_PROBES)
        bad = np.abs(res) > 1e-10 * np.maximum(scale, 1.0)
        if np.any(bad):
            worst = float(np.max(np.abs(res)))
            raise ConstraintError(
                f"mean profiles violate g*k*H' + f*m*F' = 0 (max residual {worst:.3e} on probe points)"
            )
    return BeamSolution(spec, params)


def plane_wave_beam(wave: WaveVector, amplitude: float = 1.0) -> BeamSpec:
    """``A = a cos``, ``B = a sin``: the travelling wave ``psi = a cos(lambda - omega t)``."""
    return BeamSpec(wave, cosine(amplitude), sine(amplitude), zero(), zero())


def lorentzian_beam(a: float, wave: WaveVector, params: PhysicalParams | None = None) -> BeamSpec:
    """``A = a/(1 + s^2)``, ``B = a s/(1 + s^2)``, no mean profiles."""
    if not a > 0:
        raise ValueError(f"a must be positive, got {a!r}")
    return BeamSpec(wave, lorentzian_even(a), lorentzian_odd(a), zero(), zero())


def balanced_mean_profile(F: Envelope, wave: WaveVector, params: PhysicalParams) -> Envelope:
    """The ``H`` that pairs with ``F`` so that ``g k H' + f m F' = 0``."""
    if wave.k == 0:
        raise ValueError("k must be non-zero to balance a mean profile")
    return F.scaled(-params.f * wave.m / (params.g * wave.k))


def beam_energy_density(spec: BeamSpec, lam) -> np.ndarray:
    """``A'(lambda)^2 + B'(lambda)^2``."""
    return spec.A(lam, 1) ** 2 + spec.B(lam, 1) ** 2


def beam_energy_at(spec: BeamSpec, x, z) -> np.ndarray:
    return beam_energy_density(spec, spec.wave.phase(x, z))


@dataclass(frozen=True)
class InvariantSolutionParams:
    wave: WaveVector
    C1: float = 0.0
    C2: float = 0.0
    C3: float = 0.0


class InvariantSolution(AnalyticSolution):
    """``psi = (C1 cos wt + C2 sin wt) lambda^2`` with ``v, rho`` linear in ``lambda``."""

    name = "invariant"

    def __init__(self, p: InvariantSolutionParams, params: PhysicalParams):
        if p.wave.k == 0 and p.C3 != 0:
            raise ValueError("k must be non-zero when C3 != 0")
        self.p = p
        self.params = params
        self.omega = omega(p.wave, params)

    def amplitudes(self, t):
        """``(phi, V, R)`` and ``(phi', V', R')`` at time ``t``."""
        p, w, P = self.p, self.omega, self.params
        k, m = p.wave.k, p.wave.m
        c, s = np.cos(w * t), np.sin(w * t)
        osc = p.C2 * c - p.C1 * s
        mean_r = -P.f * m / (P.g * k) * p.C3 if p.C3 != 0 else 0.0
        phi = p.C1 * c + p.C2 * s
        V = 2 * P.f * m / w * osc + p.C3
        R = 2 * k * P.N**2 / (P.g * w) * osc + mean_r
        dosc = -w * (p.C2 * s + p.C1 * c)
        return (phi, V, R), (w * osc, 2 * P.f * m / w * dosc, 2 * k * P.N**2 / (P.g * w) * dosc)

    def evaluate(self, t, x, z):
        k, m = self.p.wave.k, self.p.wave.m
        t, x, z = _broadcast(t, x, z)
        lam = k * x + m * z
        (phi, V, R), (dphi, dV, dR) = self.amplitudes(t)
        zero_ = np.zeros_like(lam)
        return {
            "psi": phi * lam**2,
            "psi_x": 2 * k * phi * lam,
            "psi_z": 2 * m * phi * lam,
            "psi_xx": 2 * k * k * phi + zero_,
            "psi_xz": 2 * k * m * phi + zero_,
            "psi_zz": 2 * m * m * phi + zero_,
            "psi_xxx": zero_,
            "psi_xxz": zero_,
            "psi_xzz": zero_,
            "psi_zzz": zero_,
            "psi_t": dphi * lam**2,
            "psi_xt": 2 * k * dphi * lam,
            "psi_zt": 2 * m * dphi * lam,
            "psi_xxt": 2 * k * k * dphi + zero_,
            "psi_zzt": 2 * m * m * dphi + zero_,
            "v": V * lam,
            "v_x": k * V + zero_,
            "v_z": m * V + zero_,
            "v_t": dV * lam,
            "rho": R * lam,
            "rho_x": k * R + zero_,
            "rho_z": m * R + zero_,
            "rho_t": dR * lam,
        }


def invariant_solution(p: InvariantSolutionParams, params: PhysicalParams) -> InvariantSolution:
    return InvariantSolution(p, params)


# -- residuals -----------------------------------------------------------------


def pde_residual_terms(sol: AnalyticSolution, params: PhysicalParams, t, x, z):
    """Signed terms of the three equations at sample points, from analytic derivatives."""
    d = sol.evaluate(t, x, z)
    g, f, N = params.g, params.f, params.N
    lap_t = d["psi_xxt"] + d["psi_zzt"]
    lap_x = d["psi_xxx"] + d["psi_xzz"]
    lap_z = d["psi_xxz"] + d["psi_zzz"]
    vorticity = [lap_t, -g * d["rho_x"], -f * d["v_z"], -d["psi_x"] * lap_z, d["psi_z"] * lap_x]
    along_flow = [d["v_t"], f * d["psi_z"], -d["psi_x"] * d["v_z"], d["psi_z"] * d["v_x"]]
    density = [d["rho_t"], (N**2 / g) * d["psi_x"], -d["psi_x"] * d["rho_z"], d["psi_z"] * d["rho_x"]]
    return vorticity, along_flow, density


def pde_residuals(sol: AnalyticSolution, params: PhysicalParams, t, x, z):
    """``(residuals, scales)``: residual arrays and the largest term magnitude per equation."""
    groups = pde_residual_terms(sol, params, t, x, z)
    residuals = tuple(sum(terms) for terms in groups)
    scales = tuple(max(float(np.max(np.abs(term))) for term in terms) for terms in groups)
    return residuals, scales


# -- reduced ODE ---------------------------------------------------------------


@dataclass(frozen=True)
class ODEReduction:
    """RK4 trajectory of the amplitudes ``(phi, V, R)`` of the invariant solution."""

    times: np.ndarray
    phi: np.ndarray
    V: np.ndarray
    R: np.ndarray
    dt: float


def ode_reduction_oracle(p: InvariantSolutionParams, params: PhysicalParams, t_end: float) -> ODEReduction:
    """Integrate the amplitude ODEs with RK4 at ``dt ~ 1e-3 / omega``.

    ``phi' = (g k R + f m V) / (2 (k^2 + m^2))``, ``V' = -2 f m phi``,
    ``R' = -(2 k / g) N^2 phi``, started from the closed-form values at t=0.
    """
    k, m = p.wave.k, p.wave.m
    g, f, N = params.g, params.f, params.N
    w = omega(p.wave, params)
    n = max(1, math.ceil(t_end * w / 1e-3))
    dt = t_end / n
    a = 1.0 / (2 * (k * k + m * m))
    cv, cr = -2 * f * m, -2 * k * N * N / g

    def rate(phi, V, R):
        return a * (g * k * R + f * m * V), cv * phi, cr * phi

    (phi, V, R), _ = InvariantSolution(p, params).amplitudes(0.0)
    phi, V, R = float(phi), float(V), float(R)
    out = np.empty((n + 1, 3))
    out[0] = phi, V, R
    h = dt
    for i in range(1, n + 1):
        k1 = rate(phi, V, R)
        k2 = rate(phi + 0.5 * h * k1[0], V + 0.5 * h * k1[1], R + 0.5 * h * k1[2])
        k3 = rate(phi + 0.5 * h * k2[0], V + 0.5 * h * k2[1], R + 0.5 * h * k2[2])
        k4 = rate(phi + h * k3[0], V + h * k3[1], R + h * k3[2])
        phi += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        V += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        R += h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        out[i] = phi, V, R
    return ODEReduction(np.arange(n + 1) * dt, out[:, 0], out[:, 1], out[:, 2], dt)
