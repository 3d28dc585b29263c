"""The seven obvious symmetries: characteristics and finite transformations.

Generators ``X1..X3`` translate ``v, rho, psi``; ``X4..X6`` translate
``t, x, z``; ``X7`` is the non-uniform dilation
``x, z, v, rho -> e^a (x, z, v, rho)``, ``psi -> e^{2a} psi``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .conservation import Characteristics
from .exact import AnalyticSolution
from .grid import FieldState, Grid2D, PhysicalParams, rng_from_seed
from .model import Tendencies, equation_residuals, rhs

__all__ = [
    "GeneratorId",
    "characteristics",
    "DilatedSolution",
    "apply_dilation",
    "ScalingReport",
    "scaling_exponent_check",
    "translation_check",
    "DILATION_EXPONENTS",
]


class GeneratorId(enum.Enum):
    X1 = "d/dv"
    X2 = "d/drho"
    X3 = "d/dpsi"
    X4 = "d/dt"
    X5 = "d/dx"
    X6 = "d/dz"
    X7 = "dilation"


def characteristics(
    gen: GeneratorId,
    state: FieldState,
    params: PhysicalParams | None = None,
    tendencies: Tendencies | None = None,
) -> Characteristics:
    """Characteristic triple of ``gen`` on ``state``.

    ``X4`` needs time derivatives: pass ``tendencies`` or ``params`` (then
    :func:`~stratwave.model.rhs` supplies them).
    """
    grid = state.grid
    ones, zeros = np.ones(grid.shape), np.zeros(grid.shape)
    if gen is GeneratorId.X1:
        return Characteristics(ones, zeros, zeros)
    if gen is GeneratorId.X2:
        return Characteristics(zeros, ones, zeros)
    if gen is GeneratorId.X3:
        return Characteristics(zeros, zeros, ones)
    if gen is GeneratorId.X4:
        if tendencies is None:
            if params is None:
                raise ValueError("time translation needs tendencies or params")
            tendencies = rhs(state, params)
        return Characteristics(-tendencies.dv_dt, -tendencies.drho_dt, -tendencies.dpsi_dt)
    if gen in (GeneratorId.X5, GeneratorId.X6):
        axis = "x" if gen is GeneratorId.X5 else "z"
        return Characteristics(*(-grid.diff(a, axis) for a in (state.v, state.rho, state.psi)))

    X, Z = grid.coords
    v_x, v_z = grid.gradient(state.v)
    rho_x, rho_z = grid.gradient(state.rho)
    psi_x, psi_z = grid.gradient(state.psi)
    coeffs = grid.fft(state.psi)
    psi_xx = grid.ifft(-grid.kx**2 * coeffs)
    psi_xz = grid.ifft(grid.ikx * grid.ikz * coeffs)
    psi_zz = grid.ifft(-grid.kz**2 * coeffs)
    return Characteristics(
        state.v - X * v_x - Z * v_z,
        state.rho - X * rho_x - Z * rho_z,
        2 * state.psi - X * psi_x - Z * psi_z,
        # product rule: the coordinate factors are not periodic
        w3_x=psi_x - X * psi_xx - Z * psi_xz,
        w3_z=psi_z - X * psi_xz - Z * psi_zz,
    )


# weight of each field under the dilation
DILATION_EXPONENTS = {"psi": 2, "v": 1, "rho": 1}


class DilatedSolution(AnalyticSolution):
    """``v'(t, x, z) = e^a v(t, e^-a x, e^-a z)``, likewise rho; ``psi' = e^{2a} psi(...)``."""

    name = "dilated"

    def __init__(self, base: AnalyticSolution, a: float):
        if not math.isfinite(a):
            raise ValueError(f"dilation parameter must be finite, got {a!r}")
        self.base = base
        self.a = float(a)

    def evaluate(self, t, x, z):
        shrink = math.exp(-self.a)
        d = self.base.evaluate(t, np.asarray(x, dtype=float) * shrink, np.asarray(z, dtype=float) * shrink)
        out = {}
        for key, value in d.items():
            field, _, suffix = key.partition("_")
            n_space = sum(ch in "xz" for ch in suffix)
            out[key] = math.exp((DILATION_EXPONENTS[field] - n_space) * self.a) * value
        return out


def apply_dilation(sol: AnalyticSolution, a: float) -> AnalyticSolution:
    if isinstance(sol, DilatedSolution):
        return DilatedSolution(sol.base, sol.a + a)
    return DilatedSolution(sol, a)


@dataclass(frozen=True)
class ScalingReport:
    """Measured power of ``a`` picked up by each equation residual.

    ``exponents`` is ``None`` when ``a == 1``; ``max_deviation`` is the largest
    pointwise relative mismatch between the transformed residual and
    ``a**expected * residual``.
    """

    a: float
    exponents: tuple[float, float, float] | None
    expected: tuple[int, int, int]
    max_deviation: float


def _random_rates(grid: Grid2D, rng: np.random.Generator):
    return tuple(grid.random_field(rng) for _ in range(3))


def scaling_exponent_check(
    params: PhysicalParams,
    a: float = 2.0,
    seed: int = 0,
    grid: Grid2D | None = None,
) -> ScalingReport:
    """Scale random fields by ``v, rho -> a v, a rho``, ``psi -> a^2 psi``, ``x, z -> a x, a z``.

    Time is unscaled. The transformed fields live on a grid ``a`` times larger
    with the same samples, so the transformed residuals are sampled at the
    image points of the original ones.
    """
    grid = grid or Grid2D(32, 32)
    rng = rng_from_seed(seed)
    state = FieldState.random(grid, rng)
    v_t, rho_t, zeta_t = _random_rates(grid, rng)
    base = equation_residuals(state, params, v_t, rho_t, zeta_t)

    big = Grid2D(grid.nx, grid.nz, a * grid.Lx, a * grid.Lz)
    scaled = FieldState(big, a * state.v, a * state.rho, a * a * state.psi)
    # vorticity is invariant: a^2 psi differentiated twice in a-scaled coordinates
    moved = equation_residuals(scaled, params, a * v_t, a * rho_t, zeta_t)

    expected = (0, 1, 1)
    deviation = 0.0
    for r0, r1, p in zip(base, moved, expected):
        target = a**p * r0
        deviation = max(deviation, float(np.max(np.abs(r1 - target)) / np.max(np.abs(target))))
    exponents = None
    if a != 1.0:
        exponents = tuple(
            float(math.log(np.max(np.abs(r1)) / np.max(np.abs(r0))) / math.log(a)) for r0, r1 in zip(base, moved)
        )
    return ScalingReport(float(a), exponents, expected, deviation)


def translation_check(
    params: PhysicalParams,
    shift: tuple[int, int] = (5, 3),
    seed: int = 0,
    grid: Grid2D | None = None,
) -> float:
    """Largest relative mismatch between residuals of shifted fields and shifted residuals.

    ``shift`` is in grid cells, so the translation is exact on the periodic grid.
    """
    grid = grid or Grid2D(32, 32)
    rng = rng_from_seed(seed)
    state = FieldState.random(grid, rng)
    rates = _random_rates(grid, rng)
    base = equation_residuals(state, params, *rates)

    def roll(a):
        return np.roll(a, shift, axis=(0, 1))

    moved_state = FieldState(grid, roll(state.v), roll(state.rho), roll(state.psi), state.t)
    moved = equation_residuals(moved_state, params, *(roll(r) for r in rates))
    return max(float(np.max(np.abs(m - roll(b))) / np.max(np.abs(b))) for b, m in zip(base, moved))
