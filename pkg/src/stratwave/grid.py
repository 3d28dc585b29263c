"""Doubly periodic grid, spectral differentiation and the Jacobian bracket.

Fields are plain ``float64`` arrays of shape ``(nx, nz)`` indexed ``[i_x, i_z]``;
the :class:`Grid2D` they were sampled on carries the wavenumbers and the
transforms. All operators are pure functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "Grid2D",
    "FieldState",
    "PhysicalParams",
    "NonFiniteFieldError",
    "GridMismatchError",
    "same_grid",
    "rng_from_seed",
]


class NonFiniteFieldError(ValueError):
    pass


class GridMismatchError(ValueError):
    pass


def _check_finite(values: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise NonFiniteFieldError("non-finite field")
    return values


@dataclass(frozen=True)
class PhysicalParams:
    """Constants of the model: gravity ``g``, Coriolis ``f``, buoyancy ``N``."""

    g: float
    f: float
    N: float

    def __post_init__(self):
        for name in ("g", "f", "N"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.g <= 0:
            raise ValueError(f"g must be positive, got {self.g!r}")
        if self.N <= 0:
            raise ValueError(f"N must be positive, got {self.N!r}")

    @property
    def buoyancy_weight(self) -> float:
        """g^2/N^2, the weight of rho^2 in the energy density."""
        return self.g**2 / self.N**2


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Periodic rectangular grid on ``[0, Lx) x [0, Lz)``.

    ``nx`` and ``nz`` must be even and at least 8. Spectral wavenumbers are
    cached on first use; the instance is immutable and safe to share.
    """

    nx: int
    nz: int
    Lx: float = 2 * np.pi
    Lz: float = 2 * np.pi

    def __post_init__(self):
        for name in ("nx", "nz"):
            n = getattr(self, name)
            if int(n) != n or n < 8 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 8, got {n!r}")
            object.__setattr__(self, name, int(n))
        for name in ("Lx", "Lz"):
            length = float(getattr(self, name))
            if not (np.isfinite(length) and length > 0):
                raise ValueError(f"{name} must be positive and finite, got {length!r}")
            object.__setattr__(self, name, length)

    def __eq__(self, other):
        if not isinstance(other, Grid2D):
            return NotImplemented
        return (self.nx, self.nz, self.Lx, self.Lz) == (other.nx, other.nz, other.Lx, other.Lz)

    def __hash__(self):
        return hash((self.nx, self.nz, self.Lx, self.Lz))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.nz)

    @property
    def dx(self) -> float:
        return self.Lx / self.nx

    @property
    def dz(self) -> float:
        return self.Lz / self.nz

    @property
    def area(self) -> float:
        return self.Lx * self.Lz

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    @cached_property
    def z(self) -> np.ndarray:
        return np.arange(self.nz) * self.dz

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate fields ``(X, Z)`` of shape ``(nx, nz)``."""
        return np.meshgrid(self.x, self.z, indexing="ij")

    # -- spectral metadata (rfft over z, full fft over x) -----------------

    @cached_property
    def kx_index(self) -> np.ndarray:
        return np.fft.fftfreq(self.nx, 1.0 / self.nx)[:, None]

    @cached_property
    def kz_index(self) -> np.ndarray:
        return np.fft.rfftfreq(self.nz, 1.0 / self.nz)[None, :]

    @cached_property
    def kx(self) -> np.ndarray:
        return 2 * np.pi / self.Lx * self.kx_index

    @cached_property
    def kz(self) -> np.ndarray:
        return 2 * np.pi / self.Lz * self.kz_index

    @cached_property
    def ikx(self) -> np.ndarray:
        # Nyquist column zeroed for odd derivatives
        k = self.kx.copy()
        k[self.nx // 2, :] = 0.0
        return 1j * k

    @cached_property
    def ikz(self) -> np.ndarray:
        k = self.kz.copy()
        k[:, self.nz // 2] = 0.0
        return 1j * k

    @cached_property
    def k2(self) -> np.ndarray:
        return self.kx**2 + self.kz**2

    @cached_property
    def inv_k2(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            inv = 1.0 / self.k2
        inv[0, 0] = 0.0
        return inv

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: keep integer wavenumbers strictly below n/3."""
        keep_x = np.abs(self.kx_index) < self.nx / 3
        keep_z = np.abs(self.kz_index) < self.nz / 3
        return keep_x & keep_z

    def fft(self, values: np.ndarray) -> np.ndarray:
        return np.fft.rfft2(values)

    def ifft(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.irfft2(coeffs, s=self.shape)

    # -- operators ---------------------------------------------------------

    def check(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if values.shape != self.shape:
            raise GridMismatchError(f"field shape {values.shape} does not match grid {self.shape}")
        return _check_finite(values)

    def diff(self, values: np.ndarray, axis: str, order: int = 1) -> np.ndarray:
        """Spectral derivative of ``values`` along ``axis`` ('x' or 'z')."""
        values = self.check(values)
        if axis not in ("x", "z"):
            raise ValueError(f"axis must be 'x' or 'z', got {axis!r}")
        if order == 1:
            mult = self.ikx if axis == "x" else self.ikz
        elif order == 2:
            mult = -(self.kx**2) if axis == "x" else -(self.kz**2)
        else:
            raise ValueError(f"order must be 1 or 2, got {order!r}")
        return self.ifft(mult * self.fft(values))

    def dx_(self, values: np.ndarray) -> np.ndarray:
        return self.diff(values, "x", 1)

    def dz_(self, values: np.ndarray) -> np.ndarray:
        return self.diff(values, "z", 1)

    def gradient(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        coeffs = self.fft(self.check(values))
        return self.ifft(self.ikx * coeffs), self.ifft(self.ikz * coeffs)

    def laplacian(self, values: np.ndarray) -> np.ndarray:
        return self.ifft(-self.k2 * self.fft(self.check(values)))

    def inv_laplacian(self, values: np.ndarray) -> np.ndarray:
        """Zero-mean solution of ``laplacian(u) = values - mean(values)``."""
        return self.ifft(-self.inv_k2 * self.fft(self.check(values)))

    def jacobian(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Pointwise ``a_x b_z - a_z b_x`` (no dealiasing)."""
        a_x, a_z = self.gradient(a)
        b_x, b_z = self.gradient(b)
        return a_x * b_z - a_z * b_x

    def integrate(self, values: np.ndarray) -> float:
        """Periodic quadrature ``sum(values) dx dz``."""
        return float(np.sum(self.check(values)) * self.dx * self.dz)

    def refined(self, factor: int) -> "Grid2D":
        """Same box with ``factor`` times as many points per axis."""
        if int(factor) != factor or factor < 1:
            raise ValueError(f"refinement factor must be a positive integer, got {factor!r}")
        return Grid2D(self.nx * int(factor), self.nz * int(factor), self.Lx, self.Lz)

    def interpolate(self, values: np.ndarray, target: "Grid2D") -> np.ndarray:
        """Trigonometric interpolation onto a finer grid of the same box (zero padding).

        Nyquist coefficients are dropped, so the result is the interpolant of
        the resolved part of ``values``.
        """
        if (target.Lx, target.Lz) != (self.Lx, self.Lz) or target.nx < self.nx or target.nz < self.nz:
            raise GridMismatchError(f"cannot interpolate from {self} onto {target}")
        coeffs = self.fft(self.check(values))
        hx, hz = (self.nx - 1) // 2, (self.nz - 1) // 2
        padded = np.zeros((target.nx, target.nz // 2 + 1), dtype=complex)
        padded[: hx + 1, : hz + 1] = coeffs[: hx + 1, : hz + 1]
        padded[target.nx - hx :, : hz + 1] = coeffs[self.nx - hx :, : hz + 1]
        ratio = (target.nx * target.nz) / (self.nx * self.nz)
        return target.ifft(ratio * padded)

    def band_limit(self) -> tuple[int, int]:
        """Largest integer wavenumbers whose cubic products stay below Nyquist."""
        return (self.nx // 2 - 1) // 3, (self.nz // 2 - 1) // 3

    def random_field(
        self,
        rng: np.random.Generator,
        amplitude: float = 1.0,
        kmax: tuple[int, int] | None = None,
        include_mean: bool = True,
    ) -> np.ndarray:
        """Seeded random field band-limited to ``|k| <= kmax`` per axis.

        The result is scaled so that ``max|field| == amplitude``.
        """
        kx_max, kz_max = self.band_limit() if kmax is None else kmax
        shape = (self.nx, self.nz // 2 + 1)
        coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        mask = (np.abs(self.kx_index) <= kx_max) & (np.abs(self.kz_index) <= kz_max)
        coeffs = coeffs * mask
        if not include_mean:
            coeffs[0, 0] = 0.0
        values = self.ifft(coeffs)
        peak = np.max(np.abs(values))
        return values * (amplitude / peak) if peak > 0 else values


@dataclass(frozen=True, eq=False)
class FieldState:
    """Sampled ``(v, rho, psi)`` at time ``t`` on one grid."""

    grid: Grid2D
    v: np.ndarray
    rho: np.ndarray
    psi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        for name in ("v", "rho", "psi"):
            values = self.grid.check(getattr(self, name))
            object.__setattr__(self, name, values)
        object.__setattr__(self, "t", float(self.t))

    @cached_property
    def zeta(self) -> np.ndarray:
        """Vorticity ``laplacian(psi)``."""
        return self.grid.laplacian(self.psi)

    def replace(self, **changes) -> "FieldState":
        kwargs = dict(grid=self.grid, v=self.v, rho=self.rho, psi=self.psi, t=self.t)
        kwargs.update(changes)
        return FieldState(**kwargs)

    def scaled(self, factor: float) -> "FieldState":
        return self.replace(v=factor * self.v, rho=factor * self.rho, psi=factor * self.psi)

    def refined(self, factor: int) -> "FieldState":
        """The state interpolated onto a grid ``factor`` times finer.

        Products of the refined fields are free of aliasing for moderate
        polynomial degree, which keeps pointwise identities exact.
        """
        fine = self.grid.refined(factor)
        v, rho, psi = (self.grid.interpolate(a, fine) for a in (self.v, self.rho, self.psi))
        return FieldState(fine, v, rho, psi, self.t)

    @classmethod
    def zeros(cls, grid: Grid2D, t: float = 0.0) -> "FieldState":
        zero = np.zeros(grid.shape)
        return cls(grid, zero, zero.copy(), zero.copy(), t)

    @classmethod
    def random(
        cls,
        grid: Grid2D,
        rng: np.random.Generator,
        amplitude: float = 1.0,
        kmax: tuple[int, int] | None = None,
        t: float = 0.0,
    ) -> "FieldState":
        v, rho, psi = (grid.random_field(rng, amplitude, kmax) for _ in range(3))
        return cls(grid, v, rho, psi, t)


def same_grid(*grids: Grid2D) -> Grid2D:
    first = grids[0]
    for other in grids[1:]:
        if other != first:
            raise GridMismatchError(f"grid mismatch: {first} vs {other}")
    return first


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator used for every random draw in the package."""
    return np.random.Generator(np.random.Philox(int(seed)))
