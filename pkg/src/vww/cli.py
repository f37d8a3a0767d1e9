"""Batch experiment runner.

Usage:
    vww eigs      --config cfg.json --out outdir
    vww solve     --config cfg.json --out outdir
    vww forced    --config cfg.json --out outdir
    vww estimates --config cfg.json --out outdir
    vww veryweak  --config cfg.json --out outdir
    vww <cmd> --selftest

Configs are JSON, schema-validated with unknown keys rejected.  Outputs
are machine-readable: JSON for reports, CSV for bulk numbers, and
whitespace-separated .dat files for log-log plotting.  File writes are
atomic (temp file + rename) and contain no timestamps, so identical
configs reproduce byte-identical outputs.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np
from jsonschema import Draft202012Validator

from . import __version__
from .errors import ConfigError, VwwError
from .grid import Grid, GridFunction
from .potential import MollifierSpec, NuPrimitive, get_profile
from .prufer import basis_csv_rows, basis_to_cache, build_basis
from .spectral import analyze
from .wave import (ForcingTable, WaveProblem, analyze_forcing,
                   default_time_grid, solve_forced, solve_homogeneous)
from .estimates import ALL_ESTIMATE_IDS, CORE_ESTIMATE_IDS, verify
from .veryweak import (DataNet, VeryWeakExperiment, run_consistency,
                       run_existence, run_uniqueness)

# -- config schemas ----------------------------------------------------------

_NU_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["smooth"],
    "properties": {
        "smooth": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["zero", "const", "linear", "sine",
                                  "samples"]},
                "params": {"type": "array", "items": {"type": "number"}},
            },
        },
        "jumps": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"},
                      "minItems": 2, "maxItems": 2},
        },
    },
}

_DATA_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["zero", "parabola", "sine_combo", "samples"]},
        "params": {"type": "array"},
    },
}

_FORCING_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["space", "time"],
    "properties": {
        "space": _DATA_SCHEMA,
        "time": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["const", "cos", "sin", "poly"]},
                "params": {"type": "array", "items": {"type": "number"}},
            },
        },
        "time_steps": {"type": "integer", "minimum": 8},
    },
}

_COMMON = {
    "nu": _NU_SCHEMA,
    "grid_n": {"type": "integer", "minimum": 2},
    "n_max": {"type": "integer", "minimum": 1},
    "ode_tol": {"type": "number", "exclusiveMinimum": 0.0},
}

_SCHEMAS = {
    "eigs": {
        "type": "object",
        "additionalProperties": False,
        "required": ["nu", "grid_n", "n_max"],
        "properties": {
            **_COMMON,
            "cache_eigenfunctions": {"type": "boolean"},
            "write_cache": {"type": "boolean"},
        },
    },
    "solve": {
        "type": "object",
        "additionalProperties": False,
        "required": ["nu", "grid_n", "n_max", "T", "u0", "u1"],
        "properties": {
            **_COMMON,
            "T": {"type": "number", "exclusiveMinimum": 0.0},
            "n_times": {"type": "integer", "minimum": 2},
            "u0": _DATA_SCHEMA,
            "u1": _DATA_SCHEMA,
        },
    },
    "forced": {
        "type": "object",
        "additionalProperties": False,
        "required": ["nu", "grid_n", "n_max", "T", "u0", "u1", "forcing"],
        "properties": {
            **_COMMON,
            "T": {"type": "number", "exclusiveMinimum": 0.0},
            "n_times": {"type": "integer", "minimum": 2},
            "u0": _DATA_SCHEMA,
            "u1": _DATA_SCHEMA,
            "forcing": _FORCING_SCHEMA,
        },
    },
    "estimates": {
        "type": "object",
        "additionalProperties": False,
        "required": ["nu", "grid_n", "n_max", "T", "u0", "u1",
                     "estimate_ids"],
        "properties": {
            **_COMMON,
            "T": {"type": "number", "exclusiveMinimum": 0.0},
            "n_times": {"type": "integer", "minimum": 2},
            "u0": _DATA_SCHEMA,
            "u1": _DATA_SCHEMA,
            "forcing": _FORCING_SCHEMA,
            "estimate_ids": {
                "anyOf": [
                    {"enum": ["core", "all"]},
                    {"type": "array", "items": {"type": "string"},
                     "minItems": 1},
                ]
            },
            "k": {"type": "number"},
        },
    },
    "veryweak": {
        "type": "object",
        "additionalProperties": False,
        "required": ["mode", "nu", "grid_n", "n_max", "T", "u0", "u1",
                     "ladder"],
        "properties": {
            **_COMMON,
            "mode": {"enum": ["existence", "uniqueness", "consistency"]},
            "T": {"type": "number", "exclusiveMinimum": 0.0},
            "n_times": {"type": "integer", "minimum": 2},
            "u0": _DATA_SCHEMA,
            "u1": _DATA_SCHEMA,
            "u0_scale_exponent": {"type": "number"},
            "u1_scale_exponent": {"type": "number"},
            "ladder": {
                "anyOf": [
                    {"type": "array", "items": {"type": "number"},
                     "minItems": 1},
                    {"type": "object", "additionalProperties": False,
                     "required": ["k_min", "k_max"],
                     "properties": {"k_min": {"type": "integer"},
                                    "k_max": {"type": "integer"}}},
                ]
            },
            "mollifier": {"type": "string"},
            "declared_order": {"type": "integer", "minimum": 0},
            "order": {"type": "integer", "minimum": 1},
            "w_primitive": _NU_SCHEMA,
            "w0": _DATA_SCHEMA,
            "w1": _DATA_SCHEMA,
            "tolerance": {"type": "number", "exclusiveMinimum": 0.0},
        },
    },
}


def validate_config(command: str, config: dict) -> None:
    validator = Draft202012Validator(_SCHEMAS[command])
    errors = sorted(validator.iter_errors(config), key=str)
    if errors:
        where = "/".join(str(p) for p in errors[0].absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {errors[0].message}")


# -- descriptor builders -----------------------------------------------------


def _build_nu(desc: dict) -> NuPrimitive:
    return NuPrimitive.from_descriptor(desc)


def _build_data(desc: dict, grid: Grid) -> GridFunction:
    kind = desc["kind"]
    params = desc.get("params", [])
    x = grid.nodes
    if kind == "zero":
        return GridFunction.zeros(grid)
    if kind == "parabola":
        amp = float(params[0]) if params else 1.0
        return GridFunction(grid, amp * x * (1.0 - x))
    if kind == "sine_combo":
        vals = np.zeros_like(x)
        for pair in params:
            amp, m = float(pair[0]), float(pair[1])
            vals += amp * np.sin(m * math.pi * x)
        return GridFunction(grid, vals)
    if kind == "samples":
        if len(params) != grid.n + 1:
            raise ConfigError(
                f"samples data needs {grid.n + 1} values, got {len(params)}")
        return GridFunction(grid, np.asarray(params, dtype=float))
    raise ConfigError(f"unknown data kind {kind!r}")


def _time_profile(desc: dict):
    kind = desc["kind"]
    params = [float(p) for p in desc.get("params", [])]
    if kind == "const":
        c = params[0] if params else 1.0
        return lambda t: np.full_like(t, c)
    if kind == "cos":
        amp, om = (params + [1.0, 1.0])[:2]
        return lambda t: amp * np.cos(om * t)
    if kind == "sin":
        amp, om = (params + [1.0, 1.0])[:2]
        return lambda t: amp * np.sin(om * t)
    if kind == "poly":
        coeffs = params or [1.0]
        return lambda t: sum(c * t**j for j, c in enumerate(coeffs))
    raise ConfigError(f"unknown time profile {kind!r}")


def _build_forcing(desc: dict, basis, T: float, out_steps: int) -> ForcingTable:
    """Separable forcing g(t) * w(x) sampled so output times are nodes."""
    space = _build_data(desc["space"], basis.grid)
    g = _time_profile(desc["time"])
    if "time_steps" in desc:
        base = int(desc["time_steps"])
        factor = max(1, math.ceil(base / out_steps))
    else:
        dt_target = default_time_grid(basis, T)[1]
        factor = max(1, math.ceil((T / out_steps) / dt_target))
    times = np.linspace(0.0, T, out_steps * factor + 1)
    fvals = g(times)[:, None] * space.values[None, :]
    return analyze_forcing(fvals, basis, times)


def _build_ladder(desc) -> tuple:
    if isinstance(desc, dict):
        ks = range(int(desc["k_min"]), int(desc["k_max"]) + 1)
        ladder = tuple(2.0 ** (-k) for k in ks)
    else:
        ladder = tuple(float(v) for v in desc)
    if len(ladder) < 4:
        raise ConfigError(f"ladder needs at least 4 rungs, got {len(ladder)}")
    return ladder


# -- output helpers ----------------------------------------------------------


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".vww-tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: str, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: str, header: tuple, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_dat(path: str, columns: dict) -> None:
    keys = list(columns)
    rows = zip(*(columns[k] for k in keys))
    lines = ["# " + " ".join(keys)]
    for row in rows:
        lines.append(" ".join(repr(float(v)) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _meta(config: dict) -> dict:
    return {"version": __version__, "config": config}


# -- subcommands -------------------------------------------------------------


def cmd_eigs(config: dict, out: str, threads: int) -> None:
    validate_config("eigs", config)
    grid = Grid(int(config["grid_n"]))
    nu = _build_nu(config["nu"])
    tol = float(config.get("ode_tol", 1e-11))
    basis = build_basis(nu, int(config["n_max"]), grid, rtol=tol, atol=tol)
    _write_csv(os.path.join(out, "eigenvalues.csv"),
               ("n", "lambda", "theta_residual", "tilde_norm", "psi_norm"),
               basis_csv_rows(basis))
    if config.get("write_cache", True):
        cache = basis_to_cache(
            basis, include_eigenfunctions=config.get("cache_eigenfunctions",
                                                     False))
        _write_json(os.path.join(out, "basis_cache.json"),
                    {**cache, "meta": _meta(config)})


def _solve_common(config: dict, forced: bool):
    grid = Grid(int(config["grid_n"]))
    nu = _build_nu(config["nu"])
    tol = float(config.get("ode_tol", 1e-11))
    basis = build_basis(nu, int(config["n_max"]), grid, rtol=tol, atol=tol)
    u0 = _build_data(config["u0"], grid)
    u1 = _build_data(config["u1"], grid)
    T = float(config["T"])
    n_times = int(config.get("n_times", 201))
    times = np.linspace(0.0, T, n_times)
    forcing = None
    if forced:
        forcing = _build_forcing(config["forcing"], basis, T, n_times - 1)
    problem = WaveProblem(basis, analyze(u0, basis), analyze(u1, basis), T,
                          forcing=forcing)
    sol = solve_forced(problem, times) if forced \
        else solve_homogeneous(problem, times)
    return basis, problem, sol, times


def _write_solution(config: dict, out: str, sol, times) -> None:
    grid = sol.basis.grid
    rows = []
    for j, t in enumerate(times):
        for i, x in enumerate(grid.nodes):
            rows.append((float(t), float(x), float(sol.values[j, i]),
                         float(sol.dt_values[j, i])))
    _write_csv(os.path.join(out, "solution.csv"), ("t", "x", "u", "u_t"), rows)
    energy = sol.energy_series()
    e0 = float(energy[0]) if energy[0] != 0.0 else 1.0
    payload = {
        "meta": _meta(config),
        "times": [float(t) for t in times],
        "energy": [float(v) for v in energy],
        "energy_drift": float(np.ptp(energy) / abs(e0)),
        "l2_norms": [float(v) for v in sol.l2_series()],
        "boundary_max": float(max(np.max(np.abs(sol.values[:, 0])),
                                  np.max(np.abs(sol.values[:, -1])))),
    }
    _write_json(os.path.join(out, "energy.json"), payload)


def cmd_solve(config: dict, out: str, threads: int) -> None:
    validate_config("solve", config)
    _, _, sol, times = _solve_common(config, forced=False)
    _write_solution(config, out, sol, times)


def cmd_forced(config: dict, out: str, threads: int) -> None:
    validate_config("forced", config)
    _, _, sol, times = _solve_common(config, forced=True)
    _write_solution(config, out, sol, times)


def cmd_estimates(config: dict, out: str, threads: int) -> None:
    validate_config("estimates", config)
    ids = config["estimate_ids"]
    if ids == "core":
        ids = list(CORE_ESTIMATE_IDS)
    elif ids == "all":
        ids = list(ALL_ESTIMATE_IDS)
    unknown = [i for i in ids if i not in ALL_ESTIMATE_IDS]
    if unknown:
        raise ConfigError(f"unknown estimate ids: {unknown}")
    _, problem, sol, _ = _solve_common(config, forced="forcing" in config)
    k = float(config.get("k", 0.0))
    inputs = {"config": config}
    reports = [verify(i, problem, sol, k=k, inputs=inputs) for i in ids]
    _write_json(os.path.join(out, "estimates.json"), {
        "meta": _meta(config),
        "reports": [r.to_dict() for r in reports],
    })
    _write_csv(os.path.join(out, "estimates.csv"),
               ("estimate_id", "ratio", "problem_hash"),
               [(r.estimate_id, r.ratio, r.problem_hash) for r in reports])


def cmd_veryweak(config: dict, out: str, threads: int) -> None:
    validate_config("veryweak", config)
    grid = Grid(int(config["grid_n"]))
    ladder = _build_ladder(config["ladder"])
    tol = float(config.get("ode_tol", 1e-10))
    exp = VeryWeakExperiment(
        nu=_build_nu(config["nu"]),
        u0=DataNet(_build_data(config["u0"], grid),
                   float(config.get("u0_scale_exponent", 0.0))),
        u1=DataNet(_build_data(config["u1"], grid),
                   float(config.get("u1_scale_exponent", 0.0))),
        ladder=ladder, grid=grid,
        mollifier=config.get("mollifier", "bump"),
        n_max=int(config["n_max"]), T=float(config["T"]),
        n_times=int(config.get("n_times", 65)),
        ode_rtol=tol, ode_atol=tol,
    )
    mode = config["mode"]
    if mode == "existence":
        rep = run_existence(exp, int(config.get("declared_order", 0)),
                            threads=threads)
        csv_rows = (
            [(eps, v, "L2_sup_t") for eps, v in zip(ladder, rep.u_norms)]
            + [(eps, v, "dt_L2_sup_t") for eps, v in zip(ladder, rep.dtu_norms)]
            + [(eps, v, "q_Linf") for eps, v in zip(ladder, rep.q_linf_norms)]
        )
        dat = {"epsilon": ladder, "u_norm": rep.u_norms,
               "dtu_norm": rep.dtu_norms, "q_linf": rep.q_linf_norms}
    elif mode == "uniqueness":
        if "order" not in config:
            raise ConfigError("uniqueness mode needs 'order'")
        wp = _build_nu(config["w_primitive"]) if "w_primitive" in config else None
        w0 = _build_data(config["w0"], grid) if "w0" in config else None
        w1 = _build_data(config["w1"], grid) if "w1" in config else None
        rep = run_uniqueness(exp, int(config["order"]), w_primitive=wp,
                             w0=w0, w1=w1, threads=threads)
        csv_rows = [(eps, v, "diff_L2_sup_t")
                    for eps, v in zip(ladder, rep.diff_norms)]
        dat = {"epsilon": ladder, "diff_norm": rep.diff_norms}
    else:
        rep = run_consistency(exp, float(config.get("tolerance", 1e-3)),
                              threads=threads)
        csv_rows = [(eps, v, "discrepancy_sup_t")
                    for eps, v in zip(ladder, rep.discrepancies)]
        dat = {"epsilon": ladder, "discrepancy": rep.discrepancies}
    _write_json(os.path.join(out, "report.json"),
                {"meta": _meta(config), "mode": mode, "report": rep.to_dict()})
    _write_csv(os.path.join(out, "net.csv"), ("epsilon", "norm", "norm_kind"),
               csv_rows)
    _write_dat(os.path.join(out, "loglog.dat"), dat)


_COMMANDS = {
    "eigs": cmd_eigs,
    "solve": cmd_solve,
    "forced": cmd_forced,
    "estimates": cmd_estimates,
    "veryweak": cmd_veryweak,
}


# -- selftest ----------------------------------------------------------------


def _selftest() -> int:
    """Run the quick closed-form battery in-process."""
    from .potential import (RegularizedNet, check_negligibility, evaluate_nu,
                            extend_by_zero, fit_moderateness,
                            mollify_potential)
    from .prufer import integrate_prufer, shoot_eigenvalue
    from .spectral import sobolev_norm, synthesize
    from .wave import fd_oracle

    checks = []

    def check(name, fn):
        try:
            fn()
            checks.append((name, True, ""))
        except Exception as exc:  # noqa: BLE001 - report every failure
            checks.append((name, False, f"{type(exc).__name__}: {exc}"))

    g = Grid(256)
    step = NuPrimitive(jumps=((0.5, 1.0),))
    mixed = NuPrimitive("linear", (2.0,), jumps=((0.3, 3.0),))
    free = NuPrimitive()

    check("evaluate_nu left of jump",
          lambda: _expect(evaluate_nu(step, 0.25), 0.0))
    check("evaluate_nu right of jump",
          lambda: _expect(evaluate_nu(step, 0.75), 1.0))
    check("evaluate_nu mixed", lambda: _expect(evaluate_nu(mixed, 0.5), 4.0))

    ones = GridFunction(g, np.ones(g.n + 1))
    ext = extend_by_zero(ones)
    check("zero extension outside", lambda: _expect(float(ext(1.5)), 0.0))
    check("zero extension inside", lambda: _expect(float(ext(0.5)), 1.0))

    def scaling():
        eps = 1.0 / 16.0
        q = mollify_potential(step, MollifierSpec("bump", eps), g)
        _expect(float(q.values.max()) * eps, get_profile("bump").peak, 1e-12)
    check("mollifier scaling identity", scaling)
    check("mollify zero potential", lambda: _expect(
        float(np.abs(mollify_potential(
            NuPrimitive("const", (3.0,)), MollifierSpec("bump", 0.05),
            g).values).max()), 0.0))

    lad = tuple(2.0 ** (-k) for k in range(1, 7))
    check("moderateness exact power law", lambda: _expect(
        fit_moderateness(RegularizedNet(lad, tuple(e**-2 for e in lad))).slope,
        2.0, 1e-12))
    check("moderateness constant", lambda: _expect(
        fit_moderateness(RegularizedNet(lad, (1.0,) * 6)).slope, 0.0, 1e-12))
    check("negligibility pass", lambda: _assert(
        check_negligibility(RegularizedNet(lad, tuple(e**3 for e in lad)),
                            3).passed))
    check("negligibility fail", lambda: _assert(
        not check_negligibility(RegularizedNet(lad, tuple(e**3 for e in lad)),
                                5).passed))

    check("free phase pi", lambda: _expect(
        integrate_prufer(free, math.pi**2, g).theta[-1], math.pi, 1e-10))
    check("free phase 2pi", lambda: _expect(
        integrate_prufer(free, 4 * math.pi**2, g).theta[-1], 2 * math.pi,
        1e-10))
    check("free lambda_3", lambda: _expect(
        shoot_eigenvalue(free, 3, g).lam, 9 * math.pi**2, 1e-6))
    check("constant nu lambda_1", lambda: _expect(
        shoot_eigenvalue(NuPrimitive("const", (2.0,)), 1, g).lam,
        math.pi**2, 1e-6))
    check("delta-inert mode lambda_2", lambda: _expect(
        shoot_eigenvalue(step, 2, g).lam, 4 * math.pi**2, 1e-6))

    basis = build_basis(free, 5, g)
    s1 = GridFunction(g, math.sqrt(2.0) * np.sin(math.pi * g.nodes))
    c = analyze(s1, basis)
    check("analyze single mode", lambda: _expect(float(c.coeffs[0]), 1.0, 1e-9))
    check("analyze single mode tail", lambda: _expect(
        float(np.abs(c.coeffs[1:]).max()), 0.0, 1e-9))
    check("synthesize round trip", lambda: _expect(
        (synthesize(c) - s1).norm_l2(), 0.0, 1e-8))
    check("sobolev k=1", lambda: _expect(
        sobolev_norm(analyze(GridFunction(
            g, np.sin(math.pi * g.nodes)), basis), 1.0),
        math.pi / math.sqrt(2.0), 1e-9))

    z = GridFunction.zeros(g)
    prob = WaveProblem(basis, analyze(s1, basis), analyze(z, basis), T=1.0)
    sol = solve_homogeneous(prob, np.linspace(0.0, 1.0, 11))
    check("single-mode reversal at t=1", lambda: _expect(
        (sol.u_at(1.0) + s1).norm_l2(), 0.0, 1e-8))
    check("dirichlet walls", lambda: _expect(
        float(np.abs(sol.values[:, [0, -1]]).max()), 0.0))

    times = np.linspace(0.0, 1.0, 101)
    ftab = analyze_forcing(np.zeros((101, g.n + 1)), basis, times)
    probf = WaveProblem(basis, analyze(s1, basis), analyze(z, basis), T=1.0,
                        forcing=ftab)
    solf = solve_forced(probf, times[::10])
    check("zero forcing reduces to homogeneous", lambda: _expect(
        float(np.abs(solf.modal - solve_homogeneous(
            prob, times[::10]).modal).max()), 0.0, 1e-12))

    check("fd oracle zero data", lambda: _expect(
        float(np.abs(fd_oracle(z, z, z, None, 0.5, 1.0 / 512.0,
                               [0.5]).values).max()), 0.0))

    rep = verify("est1", prob, sol)
    check("est1 single-mode ratio 1", lambda: _expect(rep.ratio, 1.0, 1e-9))
    check("est5(k=0) equals est1", lambda: _expect(
        verify("est5", prob, sol, k=0.0).ratio, rep.ratio, 1e-12))

    failures = 0
    for name, ok, msg in checks:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}"
        if not ok:
            line += f"  ({msg})"
            failures += 1
        print(line)
    print(f"selftest: {len(checks) - failures}/{len(checks)} passed")
    return 0 if failures == 0 else 3


def _expect(got: float, want: float, tol: float = 0.0):
    if not abs(got - want) <= tol:
        raise AssertionError(f"got {got!r}, want {want!r} (tol {tol})")


def _assert(cond: bool):
    if not cond:
        raise AssertionError("condition failed")


# -- entry point -------------------------------------------------------------


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config root must be a JSON object")
    return config


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vww",
        description="spectral wave-equation experiments with singular "
                    "potentials")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config path")
        p.add_argument("--out", help="output directory")
        p.add_argument("--selftest", action="store_true",
                       help="run the built-in closed-form battery and exit")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: VWW_THREADS or 1)")
    args = parser.parse_args(argv)

    if args.selftest:
        return _selftest()
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("VWW_THREADS", "1"))
    try:
        if not args.config or not args.out:
            raise ConfigError("--config and --out are required")
        config = _load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        _COMMANDS[args.command](config, args.out, max(1, threads))
    except ConfigError as exc:
        print(f"vww: config error: {exc}", file=sys.stderr)
        return 2
    except VwwError as exc:
        print(f"vww: numerical failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"vww: i/o failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
