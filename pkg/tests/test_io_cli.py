"""Snapshot files, run configs and the command-line interface."""

import csv
import math
import struct
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratwave import cli, io, verify
from stratwave.grid import FieldState, Grid2D, rng_from_seed
from stratwave.io import ConfigError, RunConfig, SnapshotFormatError


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def write_config(path, **overrides):
    config = replace(RunConfig(), **overrides).validate()
    path.write_text(io.serialize_config(config))
    return path


class TestSnapshot:
    def test_roundtrip_is_bit_exact(self, tmp_path, rng):
        state = FieldState.random(Grid2D(16, 8, 3.5, 1.25), rng, t=0.1 + 0.2)
        path = tmp_path / "s.stw"
        io.write_snapshot(path, state)
        back = io.read_snapshot(path)
        assert back.grid == state.grid and back.t == state.t
        for name in ("v", "rho", "psi"):
            assert np.array_equal(getattr(back, name), getattr(state, name))

    def test_layout(self, tmp_path):
        grid = Grid2D(8, 8)
        v = np.arange(64.0).reshape(8, 8)
        state = FieldState(grid, v, -v, 2 * v, 1.5)
        path = tmp_path / "s.stw"
        io.write_snapshot(path, state)
        data = path.read_bytes()
        header, payload = data.split(b"\n", 1)
        assert header == f"STRATWAVE1 8 8 {2 * math.pi!r} {2 * math.pi!r} 1.5".encode()
        assert len(payload) == 3 * 64 * 8
        # row-major little-endian: second value is v[0, 1]; rho follows v
        assert struct.unpack("<d", payload[8:16])[0] == 1.0
        assert struct.unpack("<d", payload[64 * 8 + 8 : 64 * 8 + 16])[0] == -1.0

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.stw"
        path.write_bytes(b"NOTSTRAT 8 8 1 1 0\n" + bytes(3 * 64 * 8))
        with pytest.raises(SnapshotFormatError):
            io.read_snapshot(path)

    def test_truncated(self, tmp_path, rng):
        path = tmp_path / "s.stw"
        io.write_snapshot(path, FieldState.random(Grid2D(8, 8), rng))
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(SnapshotFormatError, match="payload"):
            io.read_snapshot(path)

    def test_missing_header(self, tmp_path):
        path = tmp_path / "s.stw"
        path.write_bytes(b"STRATWAVE1")
        with pytest.raises(SnapshotFormatError):
            io.read_snapshot(path)


class TestConfig:
    def test_defaults_validate(self):
        assert RunConfig().validate() == RunConfig()

    def test_roundtrip(self):
        config = RunConfig(g=3.3, f=-0.2, dt=0.01, initial="random", seed=99, dealias=False)
        text = io.serialize_config(config)
        again = io.serialize_config(io.parse_config(text))
        assert io.parse_config(text) == config and again == text

    def test_comments_and_auto(self):
        config = io.parse_config("# header\n g = 4.0  # gravity\n\ndt = auto\n")
        assert config.g == 4.0 and config.dt is None

    @pytest.mark.parametrize(
        "text, key",
        [
            ("g = -1", "g"),
            ("nx = 7", "nx"),
            ("N = abc", "N"),
            ("bogus = 1", "bogus"),
            ("n_steps = 1.5", "n_steps"),
            ("initial = wave", "initial"),
            ("dt = 0", "dt"),
            ("g = 1\ng = 2", "g"),
            ("dealias = maybe", "dealias"),
            ("initial = snapshot", "snapshot_path"),
            ("k = 0\nm = 0", "k"),
            ("f = nan", "f"),
            ("just words", "just"),
        ],
    )
    def test_first_offending_key(self, text, key):
        with pytest.raises(ConfigError) as info:
            io.parse_config(text)
        assert info.value.key == key

    def test_seed_override(self):
        config = RunConfig(seed=1)
        assert io.apply_seed_override(config, {"STRATWAVE_SEED": "42"}).seed == 42
        assert io.apply_seed_override(config, {}).seed == 1
        with pytest.raises(ConfigError):
            io.apply_seed_override(config, {"STRATWAVE_SEED": "x"})

    @settings(max_examples=50, deadline=None)
    @given(
        g=st.floats(1e-3, 1e3),
        f=st.floats(-10, 10),
        N=st.floats(1e-3, 10),
        n=st.integers(4, 64).map(lambda k: 2 * k),
        dt=st.one_of(st.none(), st.floats(1e-6, 1.0)),
        seed=st.integers(0, 2**64 - 1),
        output=st.text(st.characters(whitelist_categories=("L", "N")), min_size=1, max_size=12),
    )
    def test_roundtrip_property(self, g, f, N, n, dt, seed, output):
        config = RunConfig(g=g, f=f, N=N, nx=n, nz=n, dt=dt, seed=seed, output=output)
        text = io.serialize_config(config)
        assert io.parse_config(text) == config
        assert io.serialize_config(io.parse_config(text)) == text

    def test_initial_states(self, params):
        cfg = RunConfig(g=params.g, f=params.f, N=params.N, nx=16, nz=16)
        pw = io.initial_state(cfg)
        assert abs(np.max(pw.psi) - 1.0) < 1e-12
        sm = io.initial_state(replace(cfg, initial="standing-mode", amplitude=0.1))
        assert np.max(np.abs(sm.v)) == 0.0 and np.max(sm.psi) == pytest.approx(0.1)
        r1 = io.initial_state(replace(cfg, initial="random", seed=3))
        r2 = io.initial_state(replace(cfg, initial="random", seed=3))
        assert np.array_equal(r1.psi, r2.psi)

    def test_snapshot_initial_must_match_grid(self, tmp_path, rng):
        path = tmp_path / "s.stw"
        io.write_snapshot(path, FieldState.random(Grid2D(8, 8), rng))
        ok = io.initial_state(RunConfig(nx=8, nz=8, initial="snapshot", snapshot_path=str(path)))
        assert ok.grid == Grid2D(8, 8)
        with pytest.raises(ConfigError) as info:
            io.initial_state(RunConfig(nx=16, nz=16, initial="snapshot", snapshot_path=str(path)))
        assert info.value.key == "snapshot_path"


class TestCli:
    def test_unknown_subcommand(self, capsys):
        assert cli.main(["bogus"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_no_subcommand(self, capsys):
        assert cli.main([]) == 2

    def test_exact_sample(self, tmp_path):
        out = tmp_path / "l.stw"
        assert cli.main(["exact-sample", "lorentzian", "--a", "1", "--k", "1", "--m", "1", "--t", "0", "--out", str(out)]) == 0
        assert out.read_bytes().startswith(b"STRATWAVE1 64 64 ")
        assert io.read_snapshot(out).t == 0.0

    def test_exact_sample_invariant(self, tmp_path):
        out = tmp_path / "i.stw"
        assert cli.main(["exact-sample", "invariant", "--C1", "0.5", "--nx", "16", "--nz", "16", "--out", str(out)]) == 0

    def test_bad_config_exit_2(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("nx = 5\n")
        assert cli.main(["simulate", str(path)]) == 2
        assert "nx" in capsys.readouterr().err

    def test_simulate_diagnose_rerun(self, tmp_path, monkeypatch):
        monkeypatch.delenv("STRATWAVE_SEED", raising=False)
        cfg = write_config(tmp_path / "run.cfg", nx=16, nz=16, n_steps=6, snapshot_every=3, dt=0.01, initial="random", amplitude=0.1, seed=5)
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main(["simulate", str(cfg), "--output", str(a)]) == 0
        assert cli.main(["simulate", str(cfg), "--output", str(b)]) == 0
        names = [p.name for p in io.list_snapshots(a)]
        assert names == ["snapshot_000000.stw", "snapshot_000003.stw", "snapshot_000006.stw"]
        for name in names:
            assert (a / name).read_bytes() == (b / name).read_bytes()
        assert io.load_config(a / "config.cfg").seed == 5

        assert cli.main(["diagnose", str(a)]) == 0
        assert cli.main(["diagnose", str(b)]) == 0
        for vector in ("v_translation", "rho_translation", "energy"):
            rows = read_csv(a / f"diagnostics_{vector}.csv")
            assert rows[0] == ["t", "c1_integral", "max_divergence_residual"]
            assert len(rows) == 4
            assert (a / f"diagnostics_{vector}.csv").read_bytes() == (b / f"diagnostics_{vector}.csv").read_bytes()
            assert all(float(r[2]) < 1e-10 for r in rows[1:])

    def test_seed_env_override(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path / "run.cfg", nx=8, nz=8, n_steps=0, initial="random", seed=1)
        monkeypatch.setenv("STRATWAVE_SEED", "77")
        assert cli.main(["simulate", str(cfg), "--output", str(tmp_path / "o")]) == 0
        assert io.load_config(tmp_path / "o" / "config.cfg").seed == 77

    def test_diagnose_single_snapshot(self, tmp_path, capsys):
        d = tmp_path / "one"
        d.mkdir()
        io.write_snapshot(d / io.snapshot_name(0), FieldState.random(Grid2D(16, 16), rng_from_seed(0)))
        assert cli.main(["diagnose", str(d), "--g", "2", "--f", "0.5", "--N", "1"]) == 0
        out = capsys.readouterr().out
        assert "drift energy 0.000000e+00" in out
        rows = read_csv(d / "diagnostics_energy.csv")
        assert len(rows) == 2

    def test_diagnose_without_params(self, tmp_path):
        d = tmp_path / "one"
        d.mkdir()
        io.write_snapshot(d / io.snapshot_name(0), FieldState.zeros(Grid2D(8, 8)))
        assert cli.main(["diagnose", str(d)]) == 2
        assert cli.main(["diagnose", str(tmp_path / "missing")]) == 2

    def test_beam_energy(self, tmp_path):
        assert cli.main(["beam-energy", "lorentzian", "--a", "2", "--nx", "8", "--nz", "8", "--n-lam", "11", "--out", str(tmp_path)]) == 0
        lam_rows = read_csv(tmp_path / "beam_energy_lambda.csv")
        assert lam_rows[0] == ["lambda", "E"] and len(lam_rows) == 12
        lam, E = map(float, lam_rows[6])
        assert lam == 0.0 and E == 4.0
        grid_rows = read_csv(tmp_path / "beam_energy_grid.csv")
        assert grid_rows[0] == ["x", "z", "E"] and len(grid_rows) == 65
        assert cli.main(["beam-energy", "invariant", "--out", str(tmp_path)]) == 2

    def test_verify_exit_codes(self, monkeypatch, capsys):
        assert cli.main(["verify", "symmetry", "--seed", "1"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines and all(line.startswith("PASS symmetry ") and len(line.split()) == 5 for line in lines)

        monkeypatch.setitem(verify.SUITES, "symmetry", lambda seed: [verify.Check("symmetry", "forced", 1.0, 0.5)])
        assert cli.main(["verify", "symmetry"]) == 1
        assert capsys.readouterr().out == "FAIL symmetry forced 1.000000e+00 5.0e-01\n"

    def test_verify_unknown_suite(self):
        assert cli.main(["verify", "nothing"]) == 2


class TestCheck:
    def test_negative_control_direction(self):
        assert verify.Check("s", "c", 1e-3, 1e-4, upper=False).passed
        assert not verify.Check("s", "c", 1e-5, 1e-4, upper=False).passed
        assert not verify.Check("s", "c", float("nan"), 1.0).passed

    def test_unknown_suite(self):
        with pytest.raises(ValueError):
            verify.run_suite("nope")
