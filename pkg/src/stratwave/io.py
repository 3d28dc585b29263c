"""Snapshot files, run configuration and CSV output.

Snapshot layout: one ASCII header line ``STRATWAVE1 nx nz Lx Lz t`` followed
by the arrays ``v, rho, psi`` of shape ``(nx, nz)``, each written row-major as
little-endian float64. Floats in the header use ``repr`` so that they
round-trip exactly.

Run configurations are flat UTF-8 ``key = value`` files; ``#`` starts a
comment. Every key has a default, unknown keys are rejected.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .grid import FieldState, Grid2D, PhysicalParams, rng_from_seed

__all__ = [
    "MAGIC",
    "SnapshotFormatError",
    "ConfigError",
    "RunConfig",
    "write_snapshot",
    "read_snapshot",
    "snapshot_name",
    "list_snapshots",
    "parse_config",
    "serialize_config",
    "load_config",
    "apply_seed_override",
    "initial_state",
    "write_csv",
    "SEED_ENV",
]

MAGIC = "STRATWAVE1"
SEED_ENV = "STRATWAVE_SEED"
_DTYPE = np.dtype("<f8")


class SnapshotFormatError(ValueError):
    pass


class ConfigError(ValueError):
    """Malformed configuration; ``key`` names the first offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


# -- snapshots -----------------------------------------------------------------


def write_snapshot(path: str | os.PathLike, state: FieldState) -> None:
    grid = state.grid
    header = f"{MAGIC} {grid.nx} {grid.nz} {grid.Lx!r} {grid.Lz!r} {float(state.t)!r}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for a in (state.v, state.rho, state.psi):
            fh.write(np.ascontiguousarray(a, dtype=_DTYPE).tobytes(order="C"))


def read_snapshot(path: str | os.PathLike) -> FieldState:
    with open(path, "rb") as fh:
        data = fh.read()
    end = data.find(b"\n")
    if end < 0:
        raise SnapshotFormatError(f"{path}: missing header line")
    try:
        parts = data[:end].decode("ascii").split()
    except UnicodeDecodeError:
        raise SnapshotFormatError(f"{path}: header is not ASCII") from None
    if len(parts) != 6 or parts[0] != MAGIC:
        raise SnapshotFormatError(f"{path}: expected header '{MAGIC} nx nz Lx Lz t'")
    try:
        nx, nz = int(parts[1]), int(parts[2])
        Lx, Lz, t = (float(p) for p in parts[3:])
    except ValueError:
        raise SnapshotFormatError(f"{path}: malformed header values") from None
    payload = data[end + 1 :]
    expected = 3 * nx * nz * _DTYPE.itemsize
    if len(payload) != expected:
        raise SnapshotFormatError(f"{path}: expected {expected} payload bytes, found {len(payload)}")
    arrays = np.frombuffer(payload, dtype=_DTYPE).reshape(3, nx, nz).astype(float)
    return FieldState(Grid2D(nx, nz, Lx, Lz), arrays[0], arrays[1], arrays[2], t)


def snapshot_name(step: int) -> str:
    return f"snapshot_{step:06d}.stw"


def list_snapshots(directory: str | os.PathLike) -> list[Path]:
    return sorted(Path(directory).glob("snapshot_*.stw"))


# -- configuration -------------------------------------------------------------

INITIAL_KINDS = ("plane-wave", "standing-mode", "random", "snapshot")


@dataclass(frozen=True)
class RunConfig:
    """Everything ``stratwave simulate`` needs.

    ``k`` and ``m`` are integer mode numbers, so the exact initial conditions
    are periodic on the box. ``dt = None`` means automatic.
    """

    g: float = 9.81
    f: float = 1.0
    N: float = 2.0
    nx: int = 64
    nz: int = 64
    Lx: float = 2 * math.pi
    Lz: float = 2 * math.pi
    dt: float | None = None
    n_steps: int = 100
    snapshot_every: int = 10
    initial: str = "plane-wave"
    k: int = 1
    m: int = 1
    amplitude: float = 1.0
    snapshot_path: str = ""
    output: str = "run"
    seed: int = 0
    hyperviscosity: float = 0.0
    dealias: bool = True

    @property
    def params(self) -> PhysicalParams:
        return PhysicalParams(self.g, self.f, self.N)

    @property
    def grid(self) -> Grid2D:
        return Grid2D(self.nx, self.nz, self.Lx, self.Lz)

    def validate(self) -> "RunConfig":
        """Raise :class:`ConfigError` naming the first key that breaks a precondition."""
        for name in ("g", "f", "N", "Lx", "Lz", "amplitude", "hyperviscosity"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(name, "must be finite")
        checks = [
            ("g", self.g > 0, "must be positive"),
            ("N", self.N > 0, "must be positive"),
            ("nx", self.nx >= 8 and self.nx % 2 == 0, "must be an even integer >= 8"),
            ("nz", self.nz >= 8 and self.nz % 2 == 0, "must be an even integer >= 8"),
            ("Lx", self.Lx > 0, "must be positive"),
            ("Lz", self.Lz > 0, "must be positive"),
            ("dt", self.dt is None or (math.isfinite(self.dt) and self.dt > 0), "must be positive or 'auto'"),
            ("n_steps", self.n_steps >= 0, "must be >= 0"),
            ("snapshot_every", self.snapshot_every >= 1, "must be >= 1"),
            ("initial", self.initial in INITIAL_KINDS, f"must be one of {', '.join(INITIAL_KINDS)}"),
            ("amplitude", self.amplitude >= 0, "must be >= 0"),
            ("seed", 0 <= self.seed < 2**64, "must be in [0, 2^64)"),
            ("hyperviscosity", self.hyperviscosity >= 0, "must be >= 0"),
            ("output", bool(self.output), "must not be empty"),
        ]
        for key, ok, message in checks:
            if not ok:
                raise ConfigError(key, message)
        if self.initial in ("plane-wave", "standing-mode") and self.k == 0 and self.m == 0:
            raise ConfigError("k", "k and m must not both be zero")
        if self.initial == "snapshot" and not self.snapshot_path:
            raise ConfigError("snapshot_path", "required when initial = snapshot")
        return self


_FIELDS = {f.name: f for f in fields(RunConfig)}
_INT_KEYS = {"nx", "nz", "n_steps", "snapshot_every", "k", "m", "seed"}
_STR_KEYS = {"initial", "snapshot_path", "output"}


def _parse_value(key: str, text: str):
    if key in _STR_KEYS:
        return text
    if key == "dealias":
        lowered = text.lower()
        if lowered in ("true", "yes", "1", "on"):
            return True
        if lowered in ("false", "no", "0", "off"):
            return False
        raise ConfigError(key, f"expected a boolean, got {text!r}")
    if key == "dt" and text.lower() == "auto":
        return None
    if key in _INT_KEYS:
        try:
            return int(text)
        except ValueError:
            raise ConfigError(key, f"expected an integer, got {text!r}") from None
    try:
        return float(text)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {text!r}") from None


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line.split()[0], f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(key, "unknown key")
        if key in values:
            raise ConfigError(key, "duplicate key")
        values[key] = _parse_value(key, value)
    return RunConfig(**values).validate()


def _format_value(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(config: RunConfig) -> str:
    lines = ["# stratwave run configuration"]
    lines += [f"{name} = {_format_value(getattr(config, name))}" for name in _FIELDS]
    return "\n".join(lines) + "\n"


def load_config(path: str | os.PathLike) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def apply_seed_override(config: RunConfig, environ=None) -> RunConfig:
    """Replace ``seed`` by ``$STRATWAVE_SEED`` when that variable is set."""
    environ = os.environ if environ is None else environ
    raw = environ.get(SEED_ENV)
    if raw is None or raw == "":
        return config
    try:
        seed = int(raw)
    except ValueError:
        raise ConfigError("seed", f"{SEED_ENV} is not an integer: {raw!r}") from None
    return replace(config, seed=seed).validate()


def initial_state(config: RunConfig) -> FieldState:
    """Initial condition described by ``config``."""
    from .exact import WaveVector, beam_solution, plane_wave_beam

    grid = config.grid
    if config.initial == "snapshot":
        state = read_snapshot(config.snapshot_path)
        if state.grid != grid:
            raise ConfigError("snapshot_path", "snapshot grid does not match nx, nz, Lx, Lz")
        return state
    if config.initial == "random":
        return FieldState.random(grid, rng_from_seed(config.seed), amplitude=config.amplitude)
    wave = WaveVector(2 * math.pi * config.k / config.Lx, 2 * math.pi * config.m / config.Lz)
    if config.initial == "plane-wave":
        return beam_solution(plane_wave_beam(wave, config.amplitude), config.params).sample(grid, 0.0)
    X, Z = grid.coords
    zeros = np.zeros(grid.shape)
    return FieldState(grid, zeros, zeros.copy(), config.amplitude * np.cos(wave.phase(X, Z)))


# -- CSV -----------------------------------------------------------------------


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    """Write ``rows`` with floats in shortest round-trip form."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) for x in row])
