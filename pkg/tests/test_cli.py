"""CLI subcommands: file outputs, exit codes, determinism."""

import json
import math
import os

import numpy as np
import pytest

from vww.cli import main


def run_cli(*args):
    return main(list(args))


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


FREE_NU = {"smooth": {"kind": "zero"}}
LIN5_NU = {"smooth": {"kind": "linear", "params": [5.0]}}


class TestEigs:
    def test_free_spectrum_csv(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {
            "nu": FREE_NU, "grid_n": 512, "n_max": 5})
        out = tmp_path / "out"
        assert run_cli("eigs", "--config", cfg, "--out", str(out)) == 0
        rows = (out / "eigenvalues.csv").read_text().strip().splitlines()
        assert rows[0] == "n,lambda,theta_residual,tilde_norm,psi_norm"
        lams = [float(r.split(",")[1]) for r in rows[1:]]
        want = [(n * math.pi) ** 2 for n in range(1, 6)]
        assert np.max(np.abs(np.array(lams) / np.array(want) - 1.0)) <= 1e-8
        cache = json.loads((out / "basis_cache.json").read_text())
        assert cache["grid_n"] == 512 and len(cache["lambdas"]) == 5

    def test_constant_potential_shift(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {
            "nu": LIN5_NU, "grid_n": 512, "n_max": 5})
        out = tmp_path / "out"
        assert run_cli("eigs", "--config", cfg, "--out", str(out)) == 0
        rows = (out / "eigenvalues.csv").read_text().strip().splitlines()[1:]
        lams = [float(r.split(",")[1]) for r in rows]
        want = [(n * math.pi) ** 2 + 5.0 for n in range(1, 6)]
        assert np.max(np.abs(np.array(lams) - np.array(want))) <= 1e-7

    def test_malformed_json_exits_2_no_output(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{oops")
        out = tmp_path / "out"
        assert run_cli("eigs", "--config", str(bad), "--out", str(out)) == 2
        assert not out.exists() or not os.listdir(out)

    def test_unknown_key_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {
            "nu": FREE_NU, "grid_n": 512, "n_max": 5, "bogus": True})
        assert run_cli("eigs", "--config", cfg, "--out",
                       str(tmp_path / "o")) == 2

    def test_solver_failure_exits_3_naming_mode(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "c.json", {
            "nu": {"smooth": {"kind": "zero"}, "jumps": [[0.5, -6.0]]},
            "grid_n": 512, "n_max": 2})
        assert run_cli("eigs", "--config", cfg, "--out",
                       str(tmp_path / "o")) == 3
        assert "n=1" in capsys.readouterr().err

    def test_eigenfunction_cache_round_trip(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {
            "nu": FREE_NU, "grid_n": 256, "n_max": 3,
            "cache_eigenfunctions": True})
        out = tmp_path / "out"
        assert run_cli("eigs", "--config", cfg, "--out", str(out)) == 0
        from vww.prufer import basis_from_cache
        cache = json.loads((out / "basis_cache.json").read_text())
        cache.pop("meta")
        basis = basis_from_cache(cache)
        assert basis.lambdas[2] == pytest.approx(9.0 * math.pi**2, rel=1e-8)


class TestSolveCommands:
    def test_homogeneous_solution_files(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {
            "nu": FREE_NU, "grid_n": 256, "n_max": 5, "T": 1.0,
            "n_times": 11, "u0": {"kind": "sine_combo", "params": [[1, 1]]},
            "u1": {"kind": "zero"}})
        out = tmp_path / "out"
        assert run_cli("solve", "--config", cfg, "--out", str(out)) == 0
        energy = json.loads((out / "energy.json").read_text())
        assert energy["energy_drift"] <= 1e-9
        assert energy["boundary_max"] == 0.0
        lines = (out / "solution.csv").read_text().strip().splitlines()
        assert lines[0] == "t,x,u,u_t"
        assert len(lines) == 1 + 11 * 257

    def test_forced_closed_form_through_files(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {
            "nu": FREE_NU, "grid_n": 256, "n_max": 5, "T": 1.0,
            "n_times": 5, "u0": {"kind": "zero"}, "u1": {"kind": "zero"},
            "forcing": {"space": {"kind": "sine_combo", "params": [[1, 1]]},
                        "time": {"kind": "const", "params": [1.0]}}})
        out = tmp_path / "out"
        assert run_cli("forced", "--config", cfg, "--out", str(out)) == 0
        lines = (out / "solution.csv").read_text().strip().splitlines()[1:]
        rows = [tuple(float(v) for v in ln.split(",")) for ln in lines]
        end = [r for r in rows if r[0] == 1.0]
        want = {x: (1.0 - math.cos(math.pi)) / math.pi**2 * math.sin(
            math.pi * x) for x, in [(r[1],) for r in end]}
        err = max(abs(r[2] - want[r[1]]) for r in end)
        assert err <= 1e-6

    def test_velocity_mode_through_files(self, tmp_path):
        # u1 = sin(2 pi x): u(t) = sin(2 pi t) sin(2 pi x)/(2 pi)
        cfg = write_config(tmp_path, "c.json", {
            "nu": FREE_NU, "grid_n": 256, "n_max": 5, "T": 0.4,
            "n_times": 3, "u0": {"kind": "zero"},
            "u1": {"kind": "sine_combo", "params": [[1, 2]]}})
        out = tmp_path / "out"
        assert run_cli("solve", "--config", cfg, "--out", str(out)) == 0
        lines = (out / "solution.csv").read_text().strip().splitlines()[1:]
        rows = [tuple(float(v) for v in ln.split(",")) for ln in lines]
        end = [r for r in rows if r[0] == 0.4]
        amp = math.sin(2.0 * math.pi * 0.4) / (2.0 * math.pi)
        err = max(abs(r[2] - amp * math.sin(2.0 * math.pi * r[1]))
                  for r in end)
        assert err <= 1e-8

    def test_missing_forcing_block_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {
            "nu": FREE_NU, "grid_n": 256, "n_max": 5, "T": 1.0,
            "u0": {"kind": "zero"}, "u1": {"kind": "zero"}})
        assert run_cli("forced", "--config", cfg, "--out",
                       str(tmp_path / "o")) == 2


class TestEstimatesCommand:
    def test_single_mode_est1_end_to_end(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {
            "nu": FREE_NU, "grid_n": 256, "n_max": 5, "T": 1.0,
            "n_times": 21, "u0": {"kind": "sine_combo", "params": [[1, 1]]},
            "u1": {"kind": "zero"}, "estimate_ids": ["est1"]})
        out = tmp_path / "out"
        assert run_cli("estimates", "--config", cfg, "--out", str(out)) == 0
        rep = json.loads((out / "estimates.json").read_text())["reports"][0]
        assert rep["ratio"] == pytest.approx(1.0, abs=1e-8)
        csv = (out / "estimates.csv").read_text().splitlines()
        assert csv[0] == "estimate_id,ratio,problem_hash"

    def test_core_suite_all_finite(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {
            "nu": LIN5_NU, "grid_n": 256, "n_max": 8, "T": 1.0,
            "n_times": 17, "u0": {"kind": "parabola"},
            "u1": {"kind": "sine_combo", "params": [[0.5, 2]]},
            "forcing": {"space": {"kind": "sine_combo", "params": [[1, 3]]},
                        "time": {"kind": "cos", "params": [1.0, 2.0]}},
            "estimate_ids": "core"})
        out = tmp_path / "out"
        assert run_cli("estimates", "--config", cfg, "--out", str(out)) == 0
        reports = json.loads((out / "estimates.json").read_text())["reports"]
        assert len(reports) == 13
        assert all(np.isfinite(r["ratio"]) for r in reports)

    def test_unknown_estimate_id_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {
            "nu": FREE_NU, "grid_n": 256, "n_max": 5, "T": 1.0,
            "u0": {"kind": "zero"}, "u1": {"kind": "zero"},
            "estimate_ids": ["est1", "nope"]})
        assert run_cli("estimates", "--config", cfg, "--out",
                       str(tmp_path / "o")) == 2


VW_BASE = {
    "mode": "consistency", "nu": LIN5_NU, "grid_n": 512, "n_max": 8,
    "T": 0.5, "n_times": 17, "u0": {"kind": "parabola"},
    "u1": {"kind": "zero"}, "ladder": {"k_min": 2, "k_max": 5},
}


class TestVeryweakCommand:
    def test_consistency_outputs(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", VW_BASE)
        out = tmp_path / "out"
        assert run_cli("veryweak", "--config", cfg, "--out", str(out)) == 0
        rep = json.loads((out / "report.json").read_text())
        assert rep["mode"] == "consistency"
        assert rep["report"]["strictly_decreasing"]
        net = (out / "net.csv").read_text().splitlines()
        assert net[0] == "epsilon,norm,norm_kind"
        dat = (out / "loglog.dat").read_text().splitlines()
        assert dat[0].startswith("#")
        assert len(dat) == 5

    def test_existence_uniqueness_modes(self, tmp_path):
        cfg_e = dict(VW_BASE, mode="existence",
                     nu={"smooth": {"kind": "zero"}, "jumps": [[0.5, 1.0]]},
                     grid_n=1024, ladder={"k_min": 2, "k_max": 6})
        out_e = tmp_path / "oe"
        assert run_cli("veryweak", "--config",
                       write_config(tmp_path, "e.json", cfg_e),
                       "--out", str(out_e)) == 0
        rep = json.loads((out_e / "report.json").read_text())["report"]
        assert rep["moderate"]
        assert abs(rep["q_exponent"]["slope"] - 1.0) <= 0.05

        cfg_u = dict(VW_BASE, mode="uniqueness", nu=FREE_NU, order=2,
                     w0={"kind": "sine_combo", "params": [[1, 2]]})
        out_u = tmp_path / "ou"
        assert run_cli("veryweak", "--config",
                       write_config(tmp_path, "u.json", cfg_u),
                       "--out", str(out_u)) == 0
        rep = json.loads((out_u / "report.json").read_text())["report"]
        assert rep["passed"] and rep["slope"] >= 1.8

    def test_short_ladder_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, "c.json",
                           dict(VW_BASE, ladder=[0.25, 0.125, 0.0625]))
        assert run_cli("veryweak", "--config", cfg, "--out",
                       str(tmp_path / "o")) == 2

    def test_deterministic_rerun_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", VW_BASE)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert run_cli("veryweak", "--config", cfg, "--out", str(out1)) == 0
        assert run_cli("veryweak", "--config", cfg, "--out", str(out2)) == 0
        for name in ("report.json", "net.csv", "loglog.dat"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestSelftest:
    def test_selftest_passes(self, capsys):
        assert run_cli("eigs", "--selftest") == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out


class TestThreads:
    def test_threaded_run_matches_serial(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", VW_BASE)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert run_cli("veryweak", "--config", cfg, "--out", str(out1),
                       "--threads", "1") == 0
        assert run_cli("veryweak", "--config", cfg, "--out", str(out2),
                       "--threads", "4") == 0
        assert (out1 / "report.json").read_bytes() == \
            (out2 / "report.json").read_bytes()

    def test_env_var_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("VWW_THREADS", "2")
        cfg = write_config(tmp_path, "c.json", VW_BASE)
        assert run_cli("veryweak", "--config", cfg, "--out",
                       str(tmp_path / "o")) == 0


class TestIOFailure:
    def test_unwritable_out_dir_exits_4(self, tmp_path):
        blocker = tmp_path / "blocked"
        blocker.write_text("a file, not a directory")
        cfg = write_config(tmp_path, "c.json", {
            "nu": FREE_NU, "grid_n": 256, "n_max": 2})
        assert run_cli("eigs", "--config", cfg, "--out", str(blocker)) == 4
