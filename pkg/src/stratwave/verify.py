"""Verification suites run by ``stratwave verify``.

Each suite returns a list of :class:`Check` records; a report line reads
``PASS|FAIL <suite> <check> <measured> <tol>``. Every measurement is a pure
function of the seed, so reports are byte-identical across reruns.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import adjoint, conservation, exact, symmetry, variational
from .conservation import ConservedVectorId
from .grid import FieldState, Grid2D, PhysicalParams, rng_from_seed
from .model import equation_residual_terms, rhs, simulate, term_scale

__all__ = [
    "Check",
    "SUITES",
    "DEFAULT_PARAMS",
    "run_suite",
    "format_report",
    "adjoint_discrepancies",
    "divergence_discrepancy",
    "plane_wave_run",
    "measure_frequency",
    "dispersion_cases",
]

DEFAULT_PARAMS = PhysicalParams(g=9.81, f=1.0, N=2.0)
N_STATES = 16


@dataclass(frozen=True)
class Check:
    """One measured quantity against its tolerance.

    ``upper=True`` passes when ``measured <= tol``; ``upper=False`` when
    ``measured > tol`` (used for negative controls).
    """

    suite: str
    name: str
    measured: float
    tol: float
    upper: bool = True

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.measured):
            return False
        return self.measured <= self.tol if self.upper else self.measured > self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.suite} {self.name} {self.measured:.6e} {self.tol:.1e}"


def format_report(checks: list[Check]) -> str:
    return "".join(c.line() + "\n" for c in checks)


def _random_rates(grid, rng):
    return tuple(grid.random_field(rng) for _ in range(3))


# -- adjoint ---------------------------------------------------------------------


def adjoint_discrepancies(state: FieldState, params: PhysicalParams, rates) -> tuple[float, list[float]]:
    """Relative ``max|Theta|`` under the substitution, and the three factor mismatches.

    ``rates`` are arbitrary ``(v_t, rho_t, zeta_t)``; the costate rates are
    obtained from them by the same substitution, so the original residuals
    are non-zero and the comparison is not trivially ``0 = 0``.
    """
    grid = state.grid
    v_t, rho_t, zeta_t = rates
    costate = adjoint.self_adjoint_substitution(state, params)
    theta_terms = adjoint._theta_terms(state, costate)
    theta_rel = float(np.max(np.abs(sum(theta_terms)))) / term_scale(theta_terms)

    w = params.buoyancy_weight
    costate_rates = adjoint.CostateRates(grid.inv_laplacian(zeta_t), -v_t, -w * rho_t, lap_phi_t=zeta_t)
    adj_groups = adjoint.adjoint_residual_terms(state, costate, params, costate_rates)
    orig_groups = equation_residual_terms(state, params, v_t, rho_t, zeta_t)
    mismatches = []
    for c, adj_terms, orig_terms in zip(adjoint.equivalence_factors(params), adj_groups, orig_groups):
        diff = sum(adj_terms) - c * sum(orig_terms)
        scale = max(term_scale(adj_terms), c * term_scale(orig_terms))
        mismatches.append(float(np.max(np.abs(diff))) / scale)
    return theta_rel, mismatches


def _adjoint_suite(seed: int) -> list[Check]:
    rng = rng_from_seed(seed)
    grid = Grid2D(64, 64)
    theta_worst, factor_worst = 0.0, [0.0, 0.0, 0.0]
    for _ in range(N_STATES):
        state = FieldState.random(grid, rng)
        th, mism = adjoint_discrepancies(state, DEFAULT_PARAMS, _random_rates(grid, rng))
        theta_worst = max(theta_worst, th)
        factor_worst = [max(a, b) for a, b in zip(factor_worst, mism)]
    checks = [Check("adjoint", "theta_substituted", theta_worst, 1e-11)]
    names = ("factor_vorticity", "factor_along_flow", "factor_density")
    checks += [Check("adjoint", n, m, 1e-10) for n, m in zip(names, factor_worst)]
    return checks


# -- conservation ----------------------------------------------------------------


def divergence_discrepancy(vector: ConservedVectorId, state: FieldState, params: PhysicalParams) -> float:
    """``max|D_t C1 + D_x C2 + D_z C3|`` over the largest term magnitude."""
    terms = conservation.divergence_terms(vector, state, params)
    return float(np.max(np.abs(sum(terms)))) / term_scale(terms)


@functools.lru_cache(maxsize=8)
def plane_wave_run(params: PhysicalParams, k: int = 1, m: int = 1, steps_per_period: int = 200, periods: int = 1, n: int = 64):
    """Plane-wave beam ``A = cos, B = sin`` simulated on an ``n^2`` box of side ``2 pi``.

    Returns ``(trajectory, solution)`` with one snapshot per period.
    """
    grid = Grid2D(n, n)
    sol = exact.beam_solution(exact.plane_wave_beam(exact.WaveVector(k, m)), params)
    period = 2 * math.pi / sol.omega
    traj = simulate(sol.sample(grid, 0.0), params, period / steps_per_period, steps_per_period * periods, steps_per_period)
    return traj, sol


def _field_error(state: FieldState, sol: exact.AnalyticSolution) -> float:
    ref = sol.sample(state.grid, state.t)
    return max(float(np.max(np.abs(a - b))) for a, b in zip((state.v, state.rho, state.psi), (ref.v, ref.rho, ref.psi)))


def _conservation_suite(seed: int) -> list[Check]:
    rng = rng_from_seed(seed)
    grid = Grid2D(64, 64)
    states = [FieldState.random(grid, rng) for _ in range(N_STATES)]
    tols = {
        ConservedVectorId.V_TRANSLATION: 1e-11,
        ConservedVectorId.RHO_TRANSLATION: 1e-11,
        ConservedVectorId.ENERGY: 1e-9,
    }
    checks = []
    for vector, tol in tols.items():
        worst = max(divergence_discrepancy(vector, s, DEFAULT_PARAMS) for s in states)
        checks.append(Check("conservation", f"divergence_{vector.value}", worst, tol))

    worst = 0.0
    for s in states:
        w = symmetry.characteristics(symmetry.GeneratorId.X7, s)
        c1 = conservation.density_from_characteristics(w, s, DEFAULT_PARAMS)
        e = conservation.energy_density(s, DEFAULT_PARAMS)
        worst = max(worst, float(np.max(np.abs(conservation.energy_from_dilation_density(c1, s, DEFAULT_PARAMS) - e) / np.max(e))))
    checks.append(Check("conservation", "dilation_density_is_energy", worst, 1e-10))

    traj, _ = plane_wave_run(DEFAULT_PARAMS, periods=10)
    drift_tols = {
        ConservedVectorId.ENERGY: 1e-6,
        ConservedVectorId.V_TRANSLATION: 1e-9,
        ConservedVectorId.RHO_TRANSLATION: 1e-9,
    }
    for vector, tol in drift_tols.items():
        report = conservation.global_drift(vector, traj)
        checks.append(Check("conservation", f"drift_{vector.value}", report.max_relative_drift, tol))
    return checks


# -- variational -----------------------------------------------------------------


def _variational_suite(seed: int) -> list[Check]:
    checks = []
    for F, slot in variational.identity_catalogue():
        verdict = variational.is_divergence(F, N_STATES, seed, slots=[slot])
        name = "identity:" + F.name.replace(" ", "") + "/" + slot
        checks.append(Check("variational", name, verdict.max_relative, verdict.tol))
    for label, (F, trivial) in variational.density_catalogue(DEFAULT_PARAMS).items():
        verdict = variational.is_trivial_density(F, DEFAULT_PARAMS, N_STATES, seed)
        name = ("trivial:" if trivial else "nontrivial:") + label.split()[0]
        checks.append(Check("variational", name, verdict.max_relative, verdict.tol, upper=trivial))
    return checks


# -- symmetry --------------------------------------------------------------------


def _sample_points(rng, n=100, box=5.0):
    return rng.uniform(0, 20, n), rng.uniform(-box, box, n), rng.uniform(-box, box, n)


def _relative_pde_residual(sol, params, points) -> float:
    residuals, scales = exact.pde_residuals(sol, params, *points)
    return max(float(np.max(np.abs(r))) / s if s > 0 else float(np.max(np.abs(r))) for r, s in zip(residuals, scales))


def _symmetry_suite(seed: int) -> list[Check]:
    rng = rng_from_seed(seed)
    report = symmetry.scaling_exponent_check(DEFAULT_PARAMS, a=2.0, seed=seed)
    exponent_error = max(abs(e - x) for e, x in zip(report.exponents, report.expected))
    checks = [
        Check("symmetry", "dilation_exponents", exponent_error, 1e-10),
        Check("symmetry", "dilation_residual_mismatch", report.max_deviation, 1e-10),
        Check("symmetry", "translation_mismatch", symmetry.translation_check(DEFAULT_PARAMS, seed=seed), 1e-11),
    ]
    beam = exact.beam_solution(exact.lorentzian_beam(1.0, exact.WaveVector(1.0, 1.0)), DEFAULT_PARAMS)
    dilated = symmetry.apply_dilation(beam, float(rng.uniform(-1, 1)))
    checks.append(Check("symmetry", "dilated_beam_residual", _relative_pde_residual(dilated, DEFAULT_PARAMS, _sample_points(rng)), 1e-11))
    return checks


# -- exact -----------------------------------------------------------------------


def _random_wave(rng) -> exact.WaveVector:
    return exact.WaveVector(float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.5, 2.0)))


def generic_beam(params: PhysicalParams, wave: exact.WaveVector, violation: float = 0.0) -> exact.BeamSpec:
    """Gaussian/polynomial envelopes with a balanced Gaussian mean flow.

    ``violation`` perturbs ``H`` by that relative amount, breaking the
    mean-profile constraint for negative controls.
    """
    F = exact.gaussian(0.7, 1.5, 0.3)
    H = exact.balanced_mean_profile(F, wave, params).scaled(1.0 + violation)
    return exact.BeamSpec(wave, exact.gaussian(1.0, 2.0), exact.polynomial([0.1, -0.3, 0.05]), F, H)


def _exact_suite(seed: int) -> list[Check]:
    rng = rng_from_seed(seed)
    p = DEFAULT_PARAMS
    checks = []

    inv = exact.InvariantSolutionParams(_random_wave(rng), *(float(c) for c in rng.uniform(-1, 1, 3)))
    sol = exact.invariant_solution(inv, p)
    period = 2 * math.pi / sol.omega
    ode = exact.ode_reduction_oracle(inv, p, 10 * period)
    (phi, V, R), _ = sol.amplitudes(ode.times)
    err = max(float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(b)))) for a, b in ((ode.phi, phi), (ode.V, V), (ode.R, R)))
    checks.append(Check("exact", "ode_reduction", err, 1e-8))

    wave = _random_wave(rng)
    families = {
        "invariant": sol,
        "lorentzian": exact.beam_solution(exact.lorentzian_beam(float(rng.uniform(0.5, 2)), wave), p),
        "generic_beam": exact.beam_solution(generic_beam(p, wave), p),
    }
    for name, s in families.items():
        checks.append(Check("exact", f"residual_{name}", _relative_pde_residual(s, p, _sample_points(rng)), 1e-11))
    broken = exact.beam_solution(generic_beam(p, wave, violation=0.01), p, check=False)
    checks.append(Check("exact", "negative_control", _relative_pde_residual(broken, p, _sample_points(rng)), 1e-4, upper=False))

    spec = exact.lorentzian_beam(1.0, wave)
    x0, z0 = rng.uniform(-5, 5, 100), rng.uniform(-5, 5, 100)
    s = rng.uniform(-5, 5, 100)
    x1, z1 = x0 + wave.m * s, z0 - wave.k * s
    diff = np.abs(exact.beam_energy_at(spec, x0, z0) - exact.beam_energy_at(spec, x1, z1))
    checks.append(Check("exact", "beam_line_energy", float(np.max(diff)), 1e-12))
    return checks


# -- model -----------------------------------------------------------------------


def measure_frequency(params: PhysicalParams, k: int, m: int, periods: int = 10, steps_per_period: int = 200, amplitude: float = 1e-3) -> tuple[float, float]:
    """``(measured, predicted)`` frequency of a standing mode ``psi = a cos(k x + m z)``.

    The mode amplitude is projected out of every step and its zero
    crossings, located by linear interpolation, give the half period.
    """
    grid = Grid2D(32, 32)
    wave = exact.WaveVector(k, m)
    predicted = exact.omega(wave, params)
    X, Z = grid.coords
    mode = np.cos(wave.phase(X, Z))
    zeros = np.zeros(grid.shape)
    start = FieldState(grid, zeros, zeros.copy(), amplitude * mode)
    dt = 2 * math.pi / predicted / steps_per_period
    traj = simulate(start, params, dt, periods * steps_per_period)
    t = traj.times
    a = np.array([np.mean(s.psi * mode) for s in traj.states])
    idx = np.nonzero(np.sign(a[:-1]) * np.sign(a[1:]) < 0)[0]
    crossings = t[idx] - a[idx] * (t[idx + 1] - t[idx]) / (a[idx + 1] - a[idx])
    measured = math.pi * (len(crossings) - 1) / (crossings[-1] - crossings[0])
    return measured, predicted


def dispersion_cases() -> list[tuple[str, PhysicalParams, int, int]]:
    """An oblique mode and the degenerate ``omega = N`` and ``omega = f`` modes."""
    return [
        ("oblique", PhysicalParams(9.81, 1.0, 2.0), 1, 1),
        ("omega_N", PhysicalParams(9.81, 0.5, 1.5), 2, 0),
        ("omega_f", PhysicalParams(9.81, 0.8, 1.2), 0, 1),
    ]


def _model_suite(seed: int) -> list[Check]:
    rng = rng_from_seed(seed)
    p = DEFAULT_PARAMS
    grid = Grid2D(64, 64)
    checks = []

    consistency, gauge = 0.0, 0.0
    for _ in range(4):
        state = FieldState.random(grid, rng)
        tend = rhs(state, p)
        groups = equation_residual_terms(state, p, tend.dv_dt, tend.drho_dt, tend.dzeta_dt)
        consistency = max(consistency, max(float(np.max(np.abs(sum(g)))) / term_scale(g) for g in groups))
        shifted = rhs(state.replace(psi=state.psi + 3.7), p)
        pairs = ((tend.dv_dt, shifted.dv_dt), (tend.drho_dt, shifted.drho_dt), (tend.dzeta_dt, shifted.dzeta_dt))
        gauge = max(gauge, max(float(np.max(np.abs(a - b)) / np.max(np.abs(a))) for a, b in pairs))
    checks.append(Check("model", "rhs_consistency", consistency, 1e-11))
    checks.append(Check("model", "gauge_independence", gauge, 1e-12))

    traj, sol = plane_wave_run(p, steps_per_period=200)
    coarse = max(_field_error(s, sol) for s in traj.states)
    traj_fine, _ = plane_wave_run(p, steps_per_period=400)
    fine = max(_field_error(s, sol) for s in traj_fine.states)
    checks.append(Check("model", "plane_wave_error", coarse, 1e-6))
    checks.append(Check("model", "order_ratio_deviation", abs(coarse / fine - 16.0) / 16.0, 0.25))

    for name, params, k, m in dispersion_cases():
        measured, predicted = measure_frequency(params, k, m)
        checks.append(Check("model", f"dispersion_{name}", abs(measured - predicted) / predicted, 1e-3))
    return checks


SUITES: dict[str, Callable[[int], list[Check]]] = {
    "adjoint": _adjoint_suite,
    "conservation": _conservation_suite,
    "variational": _variational_suite,
    "symmetry": _symmetry_suite,
    "exact": _exact_suite,
    "model": _model_suite,
}


def run_suite(name: str, seed: int = 0) -> list[Check]:
    """Run one suite, or every suite in a fixed order for ``"all"``."""
    if name == "all":
        return [c for suite in SUITES.values() for c in suite(seed)]
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(['all', *SUITES])}")
    return SUITES[name](seed)
