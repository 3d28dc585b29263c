"""``stratwave`` command-line interface.

Subcommands: ``simulate``, ``exact-sample``, ``diagnose``, ``verify`` and
``beam-energy``. Exit codes: 0 success, 1 verification failure or runtime
error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import conservation, exact, io, verify
from .conservation import ConservedVectorId
from .grid import Grid2D, PhysicalParams
from .model import BlowUpError, simulate

log = logging.getLogger("stratwave")

FAMILIES = ("plane-wave", "lorentzian", "invariant")
DIAGNOSTIC_COLUMNS = ("t", "c1_integral", "max_divergence_residual")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_grid_args(p, n=64):
    p.add_argument("--nx", type=int, default=n)
    p.add_argument("--nz", type=int, default=n)
    p.add_argument("--Lx", type=float, default=2 * math.pi)
    p.add_argument("--Lz", type=float, default=2 * math.pi)


def _add_param_args(p, required=False):
    defaults = verify.DEFAULT_PARAMS
    for name in ("g", "f", "N"):
        p.add_argument(f"--{name}", type=float, default=None if required else getattr(defaults, name))


def _add_family_args(p):
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--a", type=float, default=1.0, help="amplitude")
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--m", type=float, default=1.0)
    for name in ("C1", "C2", "C3"):
        p.add_argument(f"--{name}", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stratwave", description="Rotating stratified internal-wave toolkit.")
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a simulation described by a config file")
    p.add_argument("config")
    p.add_argument("--output", default=None, help="override the output directory")

    p = sub.add_parser("exact-sample", help="write a snapshot of an exact solution")
    _add_family_args(p)
    _add_param_args(p)
    _add_grid_args(p)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("diagnose", help="conservation diagnostics of a snapshot directory")
    p.add_argument("directory")
    _add_param_args(p, required=True)
    p.add_argument("--out", default=None, help="directory for the CSV files")
    p.add_argument("--refine", type=int, default=3, help="grid refinement for the divergence residual")

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=["all", *verify.SUITES])
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("beam-energy", help="energy along and across a wave beam")
    _add_family_args(p)
    _add_grid_args(p)
    p.add_argument("--lam-min", type=float, default=-10.0)
    p.add_argument("--lam-max", type=float, default=10.0)
    p.add_argument("--n-lam", type=int, default=201)
    p.add_argument("--out", default=".")
    return parser


def _params(args) -> PhysicalParams:
    return PhysicalParams(args.g, args.f, args.N)


def _solution(args, params: PhysicalParams) -> exact.AnalyticSolution:
    wave = exact.WaveVector(args.k, args.m)
    if args.family == "plane-wave":
        return exact.beam_solution(exact.plane_wave_beam(wave, args.a), params)
    if args.family == "lorentzian":
        return exact.beam_solution(exact.lorentzian_beam(args.a, wave), params)
    return exact.invariant_solution(exact.InvariantSolutionParams(wave, args.C1, args.C2, args.C3), params)


def _cmd_simulate(args) -> int:
    try:
        config = io.apply_seed_override(io.load_config(args.config))
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    except io.ConfigError as exc:
        raise UsageError(f"invalid config: {exc}") from None
    if args.output is not None:
        config = replace(config, output=args.output)
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.cfg").write_text(io.serialize_config(config), encoding="utf-8")
    try:
        initial = io.initial_state(config)
    except io.ConfigError as exc:
        raise UsageError(f"invalid config: {exc}") from None

    counter = iter(range(0, config.n_steps + 1, config.snapshot_every))

    def save(state):
        io.write_snapshot(out / io.snapshot_name(next(counter)), state)

    try:
        simulate(
            initial,
            config.params,
            config.dt,
            config.n_steps,
            config.snapshot_every,
            callback=save,
            dealias=config.dealias,
            hyperviscosity=config.hyperviscosity,
        )
    except BlowUpError as exc:
        print(f"error: {exc}; snapshots written so far are kept in {out}", file=sys.stderr)
        return 1
    print(f"wrote {len(io.list_snapshots(out))} snapshots to {out}")
    return 0


def _cmd_exact_sample(args) -> int:
    params = _params(args)
    grid = Grid2D(args.nx, args.nz, args.Lx, args.Lz)
    state = _solution(args, params).sample(grid, args.t)
    out = args.out or f"{args.family}_t{args.t!r}.stw"
    io.write_snapshot(out, state)
    print(out)
    return 0


def _diagnose_params(args, directory: Path) -> PhysicalParams:
    cfg = directory / "config.cfg"
    given = (args.g, args.f, args.N)
    if all(x is not None for x in given):
        return PhysicalParams(*given)
    if cfg.exists():
        base = io.load_config(cfg).params
        return PhysicalParams(*(x if x is not None else d for x, d in zip(given, (base.g, base.f, base.N))))
    raise UsageError("no config.cfg in the directory; pass --g, --f and --N")


def _cmd_diagnose(args) -> int:
    directory = Path(args.directory)
    paths = io.list_snapshots(directory)
    if not paths:
        raise UsageError(f"no snapshot_*.stw files in {directory}")
    if args.refine < 1:
        raise UsageError("--refine must be >= 1")
    params = _diagnose_params(args, directory)
    states = [io.read_snapshot(p) for p in paths]
    out = Path(args.out) if args.out else directory
    out.mkdir(parents=True, exist_ok=True)
    for vector in ConservedVectorId:
        rows = []
        for s in states:
            c1 = conservation.evaluate(vector, s, params).c1
            residual = conservation.divergence_residual(vector, s.refined(args.refine), params)
            rows.append((s.t, s.grid.integrate(c1), float(np.max(np.abs(residual)))))
        io.write_csv(out / f"diagnostics_{vector.value}.csv", DIAGNOSTIC_COLUMNS, rows)
        drift = conservation.global_drift(vector, states, params).max_relative_drift
        print(f"drift {vector.value} {drift:.6e}")
    return 0


def _cmd_verify(args) -> int:
    seed = args.seed
    if seed is None:
        raw = os.environ.get(io.SEED_ENV, "")
        try:
            seed = int(raw) if raw else 0
        except ValueError:
            raise UsageError(f"{io.SEED_ENV} is not an integer: {raw!r}") from None
    checks = verify.run_suite(args.suite, seed)
    sys.stdout.write(verify.format_report(checks))
    return 0 if all(c.passed for c in checks) else 1


def _cmd_beam_energy(args) -> int:
    if args.family == "invariant":
        raise UsageError("beam-energy needs a beam family (plane-wave or lorentzian)")
    if args.n_lam < 2:
        raise UsageError("--n-lam must be >= 2")
    wave = exact.WaveVector(args.k, args.m)
    spec = exact.plane_wave_beam(wave, args.a) if args.family == "plane-wave" else exact.lorentzian_beam(args.a, wave)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lam = np.linspace(args.lam_min, args.lam_max, args.n_lam)
    io.write_csv(out / "beam_energy_lambda.csv", ("lambda", "E"), zip(lam, exact.beam_energy_density(spec, lam)))
    grid = Grid2D(args.nx, args.nz, args.Lx, args.Lz)
    X, Z = grid.coords
    E = exact.beam_energy_at(spec, X, Z)
    io.write_csv(out / "beam_energy_grid.csv", ("x", "z", "E"), zip(X.ravel(), Z.ravel(), E.ravel()))
    print(out / "beam_energy_lambda.csv")
    print(out / "beam_energy_grid.csv")
    return 0


COMMANDS = {
    "simulate": _cmd_simulate,
    "exact-sample": _cmd_exact_sample,
    "diagnose": _cmd_diagnose,
    "verify": _cmd_verify,
    "beam-energy": _cmd_beam_energy,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
