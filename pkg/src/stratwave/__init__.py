"""Rotating, uniformly stratified 2D internal waves.

A pseudo-spectral solver for the vorticity / along-flow velocity / density
system, closed-form beam and invariant solutions, the adjoint system,
conserved vectors, symmetry generators and variational-derivative probes,
plus a verification engine tying them together.
"""

from .grid import FieldState, Grid2D, GridMismatchError, NonFiniteFieldError, PhysicalParams, rng_from_seed
from .model import BlowUpError, Tendencies, Trajectory, rhs, simulate, step_rk4
from .conservation import ConservedVectorId, divergence_residual, global_drift
from .exact import BeamSpec, ConstraintError, InvariantSolutionParams, WaveVector, beam_solution, omega

__version__ = "0.1.0"

__all__ = [
    "FieldState",
    "Grid2D",
    "GridMismatchError",
    "NonFiniteFieldError",
    "PhysicalParams",
    "rng_from_seed",
    "BlowUpError",
    "Tendencies",
    "Trajectory",
    "rhs",
    "simulate",
    "step_rk4",
    "ConservedVectorId",
    "divergence_residual",
    "global_drift",
    "BeamSpec",
    "ConstraintError",
    "InvariantSolutionParams",
    "WaveVector",
    "beam_solution",
    "omega",
]
