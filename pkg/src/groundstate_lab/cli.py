"""Command-line front end.

Subcommands ``solve``, ``sweep``, ``fit``, ``verify`` and ``rates``.  Every
run writes ``manifest.json`` to the output directory before any work starts
and rewrites it with per-record status, wall-clock time and a file inventory
when the run ends.

Exit codes: 0 success, 1 verification checks failed, 2 no groundstate
bracket, 3 configuration error, 4 degenerate fit.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    EXTRA_COLUMNS,
    TABLE_COLUMNS,
    DegenerateFitError,
    SweepError,
    barrier_check,
    fit_power_law,
    pointwise_bound_checks,
    run_sweep,
)
from .closed_form import ExtremalParams, U_eval, extremal_profile, extremal_residual, sobolev_constant
from .config import ConfigError, RunConfig
from .core_model import (
    Branch,
    EquationKind,
    ParameterError,
    RegimeError,
    RegimeTag,
    classify_regime,
    predicted_rates,
)
from .norms import identity_report, norm_report, subcritical_limits, supercritical_targets
from .shooting import NoBracketError, ShotClass, attach_tail, find_groundstate, integrate

__all__ = ["main", "build_parser", "format_number", "read_table"]

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_NO_BRACKET = 2
EXIT_CONFIG = 3
EXIT_DEGENERATE_FIT = 4

FIT_TOLERANCES = {"a": 0.05, "lambda": 0.10, "sigma": 0.15}


def format_number(x) -> str:
    """12 significant digits in scientific notation, locale independent."""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.11e}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format_number(x) if not math.isfinite(x) else float(format_number(x))
    if hasattr(obj, "value"):
        return obj.value
    return obj


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_number(v) for v in row])


def read_table(path) -> dict[str, list]:
    """Read a sweep CSV into ``{column: values}`` (numbers as floats)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return {}
    out = {}
    for key in rows[0]:
        vals = [r[key] for r in rows]
        if key == "status":
            out[key] = vals
        else:
            out[key] = [float(v) for v in vals]
    return out


class _Run:
    """Output directory plus manifest bookkeeping."""

    def __init__(self, command: str, cfg: RunConfig, out_dir: Path):
        self.command = command
        self.cfg = cfg
        self.dir = out_dir
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        self.records: list[dict] = []
        self.t0 = time.perf_counter()
        self.manifest = {
            "command": command,
            "config_hash": cfg.digest(),
            "tool_version": __version__,
            "status": "running",
            "records": [],
            "files": [],
            "wall_clock_s": None,
        }
        self._flush()
        (self.dir / "config.ini").write_text(cfg.to_text(), encoding="utf-8")
        self.files.append("config.ini")

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.dir / name

    def _flush(self) -> None:
        (self.dir / "manifest.json").write_text(json.dumps(self.manifest, indent=2) + "\n", encoding="utf-8")

    def finish(self, status: str, message: str = "") -> None:
        inventory = []
        for name in sorted(set(self.files)):
            data = (self.dir / name).read_bytes()
            inventory.append({"name": name, "bytes": len(data), "sha256": hashlib.sha256(data).hexdigest()})
        self.manifest.update(
            status=status,
            message=message,
            records=self.records,
            files=inventory,
            wall_clock_s=round(time.perf_counter() - self.t0, 3),
        )
        self._flush()


# ---------------------------------------------------------------- commands


def cmd_rates(cfg: RunConfig, run: _Run) -> int:
    params = cfg.problem_params()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pred = predicted_rates(params)
    data = pred.as_dict()
    data["warnings"] = [str(w.message) for w in caught]
    _write_json(run.path("rates.json"), data)
    print(json.dumps(_jsonable(data), indent=2, sort_keys=True))
    return EXIT_OK


def _solve_profile(cfg: RunConfig):
    params = cfg.problem_params()
    kind = cfg.kind
    icfg = cfg.integrator_config()
    extra = {}
    if kind is EquationKind.EMDEN_FOWLER:
        ep = ExtremalParams(params.N, params.p, 1.0)
        prof = integrate(params, kind, float(U_eval(ep, 0.0)), icfg)
        prof.tail = attach_tail(prof)
        r = np.asarray(prof.grid)
        exact = U_eval(ep, r)
        err = float(np.max(np.abs(prof.values - exact) / exact))
        extra["closed_form_max_rel_error"] = err
        if err < 1e-6:
            # every member of the dilation family is a groundstate; the shot
            # is accepted once it reproduces the closed form
            prof.classification = ShotClass.GROUNDSTATE
        return prof, extra
    if kind.needs_eps and not (params.eps > 0):
        raise ConfigError(f"equation kind {kind.value} needs problem.eps > 0")
    return find_groundstate(params, kind, icfg), extra


def cmd_solve(cfg: RunConfig, run: _Run) -> int:
    prof, extra = _solve_profile(cfg)
    r = np.asarray(prof.grid)
    _write_csv(run.path("profile.csv"), ["r", "u", "du", "m"], zip(r, prof.values, prof.du, prof.flux))
    nr = norm_report(prof)
    ir = identity_report(prof, nr)
    _write_json(
        run.path("norms.json"),
        {
            "a": prof.a,
            "norms": {format_number(k): v for k, v in nr.norms.items()},
            "grad_p": nr.grad_p,
            "tail_corrected": nr.tail_corrected,
            "quadrature_error_estimate": nr.quadrature_error_estimate,
            "tail": {"kind": prof.tail.kind, "rate": prof.tail.rate, "amplitude": prof.tail.amplitude},
        },
    )
    ident = {
        "a": prof.a,
        "pohozaev_residual": ir.pohozaev_residual,
        "nehari_residual": ir.nehari_residual,
        "S": ir.S_value,
        "energy": ir.energy,
        "classification": prof.classification.value,
    }
    ident.update(extra)
    _write_json(run.path("identities.json"), ident)
    run.records.append({"a": format_number(prof.a), "status": "ok"})
    print(f"a = {format_number(prof.a)}")
    print(f"pohozaev_residual = {format_number(ir.pohozaev_residual)}")
    print(f"nehari_residual = {format_number(ir.nehari_residual)}")
    return EXIT_OK


def _plot_data(run: _Run, name: str, eps, vals) -> None:
    eps = np.asarray(eps, dtype=float)
    vals = np.asarray(vals, dtype=float)
    ok = np.isfinite(vals) & (vals > 0) & (eps > 0)
    _write_csv(run.path(name), ["log_eps", "log_value"], zip(np.log(eps[ok]), np.log(vals[ok])))


def cmd_sweep(cfg: RunConfig, run: _Run, jobs: int, emit_plot: bool) -> int:
    params = cfg.problem_params()
    if cfg.kind is not EquationKind.FULL:
        raise ConfigError("sweeps run the full equation; set problem.kind = full")
    grid = cfg.eps_grid()
    table = run_sweep(params, grid, cfg.integrator_config(), jobs=jobs)
    rows = table.rows()
    header = list(TABLE_COLUMNS) + list(EXTRA_COLUMNS)
    _write_csv(run.path("sweep.csv"), header, ([r[c] for c in header] for r in rows))
    run.records = [{"eps": format_number(r["eps"]), "status": r["status"]} for r in rows]
    if emit_plot:
        for col in ("a", "sigma", "lambda", "eps_norm_p", "rescaled_a"):
            eps, vals = table.column(col)
            if np.any(np.isfinite(vals)):
                _plot_data(run, f"plot_{col}.csv", eps, vals)
    print(f"{len(rows) - table.n_failed} of {len(rows)} records solved")
    return EXIT_OK


def _fit_targets(cfg: RunConfig, column: str) -> dict:
    params = cfg.problem_params()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pred = predicted_rates(params)
    if column == "a":
        return {"consistent": pred.u0_exponent_consistent, "printed": pred.u0_exponent_printed}
    if column == "lambda":
        return {"predicted": pred.lambda_exponent}
    if column == "sigma":
        return {"predicted": pred.sigma_exponent}
    return {}


def _fixed_log_power(cfg: RunConfig, column: str):
    fixed = cfg.get("fit", "fixed_log_power")
    if fixed is not None:
        return fixed
    params = cfg.problem_params()
    reg = classify_regime(params)
    if reg.tag is RegimeTag.CRITICAL and reg.branch is Branch.EQUAL_SQRT_N:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pred = predicted_rates(params)
        return {"a": pred.u0_log_power_consistent, "lambda": pred.lambda_log_power, "sigma": pred.sigma_log_power}.get(
            column
        )
    return None


def fit_from_table(path, column: str, fixed_log_power=None, window=None):
    """Power-law fit of one column of a sweep CSV (``status == ok`` rows)."""
    tab = read_table(path)
    if column not in tab:
        raise ConfigError(f"column {column!r} not in {path}")
    keep = [i for i, s in enumerate(tab["status"]) if s == "ok"]
    eps = np.array([tab["eps"][i] for i in keep])
    vals = np.array([tab[column][i] for i in keep])
    return fit_power_law((eps, vals), column, fixed_log_power, window)


def cmd_fit(cfg: RunConfig, run: _Run, table_path, emit_plot: bool) -> int:
    table_path = table_path or cfg.get("fit", "table")
    if not table_path:
        raise ConfigError("fit needs a table file (argument or fit.table)")
    if not Path(table_path).is_file():
        raise ConfigError(f"table file not found: {table_path}")
    column = cfg.get("fit", "column")
    fixed = _fixed_log_power(cfg, column)
    res = fit_from_table(table_path, column, fixed, cfg.fit_window())
    targets = _fit_targets(cfg, column)
    params = cfg.problem_params()
    tol = cfg.get("fit", "tolerance")
    if tol is None:
        sub = classify_regime(params).tag is RegimeTag.SUBCRITICAL
        tol = 0.02 if (sub and column == "a") else FIT_TOLERANCES.get(column, 0.05)
    verdict = {}
    for name, target in targets.items():
        if target is None or not math.isfinite(target) or target == 0.0:
            continue
        rel = abs(res.exponent - target) / abs(target)
        verdict[name] = {"target": target, "rel_error": rel, "pass": rel <= tol}
    report = {"column": column, "table": str(table_path), "tolerance": tol, "fit": res.as_dict(), "targets": verdict}
    _write_json(run.path("fit.json"), report)
    if emit_plot:
        tab = read_table(table_path)
        keep = [i for i, s in enumerate(tab["status"]) if s == "ok"]
        _plot_data(run, f"plot_fit_{column}.csv", [tab["eps"][i] for i in keep], [tab[column][i] for i in keep])
    print(f"{column}: exponent = {format_number(res.exponent)}  r2 = {format_number(res.r_squared)}")
    for name, v in verdict.items():
        print(f"  vs {name} {format_number(v['target'])}: {'PASS' if v['pass'] else 'FAIL'}")
    return EXIT_OK


def _barrier_gamma(N: int, p: float, gamma) -> float:
    if gamma is not None:
        return gamma
    if p == 2.0:
        return max(N - 2.0, (N - 1.0) / 2.0)
    return (N - p) / (p - 1.0)


def verify_checks(cfg: RunConfig) -> dict:
    """Closed-form and identity checks for the configured ``(N, p)``."""
    params = cfg.problem_params()
    N, p = params.N, params.p
    checks = {}

    prof = extremal_profile(N, p)
    r = np.geomspace(0.01, 50.0, 200)
    res = float(np.max(extremal_residual(N, p, r)))
    checks["closed_form_residual"] = {"value": res, "pass": res < 1e-6}

    nr = norm_report(prof)
    nps = nr.norms[min(nr.norms, key=lambda s: abs(s - params.pstar))]
    sob = abs(nr.grad_p - nps) / nps
    checks["sobolev_identity"] = {"value": sob, "pass": sob < 1e-3}
    s1, s2 = sobolev_constant(N, p, 1.0), sobolev_constant(N, p, 3.7)
    inv = abs(s1 - s2) / s1
    checks["sobolev_scale_invariance"] = {"value": inv, "S_star": s1, "pass": inv < 1e-8}

    gamma = _barrier_gamma(N, p, cfg.get("verify", "gamma"))
    rep = barrier_check(N, p, gamma, np.geomspace(0.01, 10.0, 25), np.geomspace(0.1, 100.0, 50))
    entry = {"gamma": gamma, "skipped": rep.skipped, "reason": rep.reason, "equality_expected": rep.equality_expected}
    if rep.skipped:
        # hypotheses of the barrier do not hold for these exponents
        entry["pass"] = True
    elif rep.equality_expected:
        entry["max_equality_residual"] = rep.max_equality_residual
        entry["pass"] = rep.max_equality_residual < 1e-10
    else:
        entry["max_violation"] = rep.max_violation
        entry["pass"] = rep.holds
    checks["barrier"] = entry

    reg = classify_regime(params)
    ps = params.pstar
    if reg.tag is RegimeTag.SUPERCRITICAL:
        A, B = supercritical_targets(params)
        nehari = abs(A - B - 1.0)
        poho = abs(ps * (A / params.q - B / params.l) - 1.0)
        checks["supercritical_targets"] = {"values": [A, B], "pass": max(nehari, poho) < 1e-12}
    elif reg.tag is RegimeTag.SUBCRITICAL:
        P_, Q_ = subcritical_limits(params)
        nehari = abs(Q_ - P_ - 1.0)
        poho = abs(ps * (Q_ / params.q - P_ / p) - 1.0)
        checks["subcritical_limits"] = {"values": [P_, Q_], "pass": max(nehari, poho) < 1e-12}

    pb = pointwise_bound_checks(prof, ps)
    checks["pointwise_bounds"] = {"C_ni": pb["C_ni"], "C_s": pb["C_s"], "pass": pb["finite"]}
    return checks


def cmd_verify(cfg: RunConfig, run: _Run) -> int:
    checks = verify_checks(cfg)
    ok = all(c["pass"] for c in checks.values())
    _write_json(run.path("verify.json"), {"all_pass": ok, "checks": checks})
    for name, c in checks.items():
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {name}")
    run.records = [{"check": k, "status": "pass" if c["pass"] else "fail"} for k, c in checks.items()]
    return EXIT_OK if ok else EXIT_CHECKS_FAILED


# ---------------------------------------------------------------- entry


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="INI configuration file")
    common.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="K=V", help="override section.key=value"
    )
    common.add_argument("--out", type=str, default=None, help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--emit-plot-data", action="store_true", help="write two-column plot CSVs")

    parser = argparse.ArgumentParser(prog="groundstate-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="solve for one groundstate")
    sub.add_parser("sweep", parents=[common], help="solve over a grid of eps")
    fit = sub.add_parser("fit", parents=[common], help="fit a power law to a sweep column")
    fit.add_argument("table", nargs="?", default=None, help="sweep CSV (defaults to fit.table)")
    fit.add_argument("--column", default=None, help="column to fit (defaults to fit.column)")
    sub.add_parser("verify", parents=[common], help="closed-form and identity checks")
    sub.add_parser("rates", parents=[common], help="print predicted rates")
    return parser


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig.defaults()
    for item in args.overrides:
        cfg.override(item)
    if getattr(args, "column", None):
        cfg.set("fit", "column", args.column)
    if args.emit_plot_data:
        cfg.set("output", "emit_plot_data", "true")
    cfg.problem_params()  # validate early
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
    except (ConfigError, ParameterError, RegimeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = os.environ.get("GROUNDSTATE_LAB_OUT") or args.out or cfg.get("output", "dir")
    emit = bool(cfg.get("output", "emit_plot_data"))
    run = _Run(args.command, cfg, Path(out))
    try:
        if args.command == "solve":
            code = cmd_solve(cfg, run)
        elif args.command == "sweep":
            code = cmd_sweep(cfg, run, args.jobs, emit)
        elif args.command == "fit":
            code = cmd_fit(cfg, run, args.table, emit)
        elif args.command == "verify":
            code = cmd_verify(cfg, run)
        else:
            code = cmd_rates(cfg, run)
    except (ConfigError, ParameterError, RegimeError) as exc:
        run.finish("config_error", str(exc))
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoBracketError, SweepError) as exc:
        run.finish("no_groundstate", str(exc))
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_NO_BRACKET
    except DegenerateFitError as exc:
        run.finish("degenerate_fit", str(exc))
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE_FIT
    run.finish("complete" if code == EXIT_OK else "checks_failed")
    return code


if __name__ == "__main__":
    sys.exit(main())
