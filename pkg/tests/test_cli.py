import hashlib
import json

import numpy as np
import pytest

from groundstate_lab import ParameterError, ProblemParams, fit_power_law, run_sweep
from groundstate_lab.cli import fit_from_table, format_number, main, read_table
from groundstate_lab.config import ConfigError, RunConfig

SUB = ["--set", "problem.N=3", "--set", "problem.p=2", "--set", "problem.q=4", "--set", "problem.l=6"]
SUB_SWEEP = SUB + ["--set", "sweep.lo=1e-5", "--set", "sweep.hi=1e-2", "--set", "sweep.points_per_decade=2"]


@pytest.fixture(scope="module")
def sweep_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    assert main(["sweep", "--out", str(out), "--jobs", "2", *SUB_SWEEP]) == 0
    return out


# ---------------------------------------------------------------- config


def test_config_round_trip():
    cfg = RunConfig.defaults()
    cfg.override("problem.q=pstar")
    cfg.override("integrator.rel_tol=1e-11")
    again = RunConfig.from_text(cfg.to_text())
    assert again.as_dict() == cfg.as_dict()
    assert again.digest() == cfg.digest()


def test_config_rejects_unknown_entries():
    with pytest.raises(ConfigError):
        RunConfig.from_text("[problem]\nM = 3\n")
    with pytest.raises(ConfigError):
        RunConfig.from_text("[solver]\nN = 3\n")
    with pytest.raises(ConfigError):
        RunConfig.defaults().override("problem.p")
    with pytest.raises(ConfigError):
        RunConfig.defaults().override("problem.N=3.5")


def test_config_resolves_critical_exponent():
    cfg = RunConfig.from_text("[problem]\nN = 5\np = 2\nq = pstar\nl = 5\n")
    assert cfg.problem_params().q == pytest.approx(10 / 3, rel=1e-15)
    ef = RunConfig.from_text("[problem]\nN = 4\nkind = emden_fowler\n")
    P = ef.problem_params()
    assert (P.q, P.l) == (4.0, 5.0)
    with pytest.raises(ConfigError):
        RunConfig.defaults().problem_params()


def test_format_number_has_twelve_significant_digits():
    assert format_number(1 / 3) == "3.33333333333e-01"
    assert format_number(float("nan")) == "nan"
    assert float(format_number(np.pi)) == pytest.approx(np.pi, rel=5e-12)


# ---------------------------------------------------------------- exit codes


def test_rates_command(tmp_path, capsys):
    args = ["rates", "--out", str(tmp_path), "--set", "problem.N=5", "--set", "problem.p=2"]
    assert main([*args, "--set", "problem.q=pstar", "--set", "problem.l=5"]) == 0
    data = json.loads((tmp_path / "rates.json").read_text())
    assert data["lambda_exponent"] == pytest.approx(-2 / 9, rel=1e-10)


@pytest.mark.parametrize(
    "extra",
    [
        ["--set", "problem.p=0.5"],
        ["--set", "problem.nonsense=1"],
        ["--set", "problem.q=1"],
        ["--jobs", "0"],
    ],
)
def test_config_errors_exit_3(tmp_path, extra):
    assert main(["solve", "--out", str(tmp_path), *SUB, *extra]) == 3


def test_missing_config_file_exits_3(tmp_path):
    assert main(["solve", "--out", str(tmp_path), "--config", str(tmp_path / "absent.ini")]) == 3


def test_no_bracket_exits_2(tmp_path):
    args = ["solve", "--out", str(tmp_path), "--set", "problem.N=3", "--set", "problem.p=2"]
    code = main([*args, "--set", "problem.q=7", "--set", "problem.l=9", "--set", "problem.eps=0.1"])
    assert code == 2
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "no_groundstate"


def test_degenerate_fit_exits_4(tmp_path, sweep_dir):
    lines = (sweep_dir / "sweep.csv").read_text().splitlines()
    short = tmp_path / "short.csv"
    short.write_text("\n".join(lines[:2]) + "\n")
    assert main(["fit", str(short), "--out", str(tmp_path / "o"), *SUB]) == 4


def test_fit_without_table_exits_3(tmp_path):
    assert main(["fit", "--out", str(tmp_path), *SUB]) == 3


# ---------------------------------------------------------------- outputs


def test_solve_outputs_and_manifest(tmp_path):
    code = main(["solve", "--out", str(tmp_path), *SUB, "--set", "problem.kind=positive_mass"])
    assert code == 0
    norms = json.loads((tmp_path / "norms.json").read_text())
    assert norms["a"] == pytest.approx(4.33738768, rel=1e-8)
    assert (tmp_path / "profile.csv").read_text().startswith("r,u,du,m\n")
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "complete"
    assert manifest["command"] == "solve"
    assert manifest["wall_clock_s"] >= 0
    for entry in manifest["files"]:
        data = (tmp_path / entry["name"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == entry["sha256"]
    assert {"config.ini", "profile.csv", "norms.json", "identities.json"} <= {f["name"] for f in manifest["files"]}


def test_config_snapshot_reproduces_run(tmp_path):
    assert main(["rates", "--out", str(tmp_path / "a"), *SUB]) == 0
    snap = tmp_path / "a" / "config.ini"
    assert main(["rates", "--out", str(tmp_path / "b"), "--config", str(snap)]) == 0
    ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
    mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert ma["config_hash"] == mb["config_hash"]


def test_environment_overrides_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("GROUNDSTATE_LAB_OUT", str(tmp_path / "env"))
    assert main(["rates", "--out", str(tmp_path / "flag"), *SUB]) == 0
    assert (tmp_path / "env" / "manifest.json").is_file()
    assert not (tmp_path / "flag").exists()


def test_sweep_output_independent_of_jobs(tmp_path, sweep_dir):
    assert main(["sweep", "--out", str(tmp_path), "--jobs", "1", *SUB_SWEEP]) == 0
    assert (tmp_path / "sweep.csv").read_bytes() == (sweep_dir / "sweep.csv").read_bytes()


def test_csv_round_trip_reproduces_fit(sweep_dir):
    P = ProblemParams(3, 2.0, 4.0, 6.0)
    cfg = RunConfig.defaults()
    for o in ("sweep.lo=1e-5", "sweep.hi=1e-2", "sweep.points_per_decade=2", "problem.q=4", "problem.l=6"):
        cfg.override(o)
    table = run_sweep(P, cfg.eps_grid())
    eps, a = table.column("a")
    rounded = (np.array([float(format_number(x)) for x in eps]), np.array([float(format_number(x)) for x in a]))
    from_csv = fit_from_table(sweep_dir / "sweep.csv", "a")
    in_process = fit_power_law(rounded, "a")
    assert from_csv.as_dict() == in_process.as_dict()
    assert from_csv.exponent == pytest.approx(fit_power_law((eps, a), "a").exponent, rel=1e-9)


def test_sweep_csv_columns(sweep_dir):
    tab = read_table(sweep_dir / "sweep.csv")
    assert {"eps", "a", "S", "lambda", "poho_res", "status", "eps_w_norm_p"} <= set(tab)
    assert all(s == "ok" for s in tab["status"])
    assert np.all(np.diff(tab["eps"]) < 0)


def test_fit_command_checks_targets(tmp_path, sweep_dir):
    code = main(["fit", str(sweep_dir / "sweep.csv"), "--out", str(tmp_path), *SUB, "--emit-plot-data"])
    assert code == 0
    report = json.loads((tmp_path / "fit.json").read_text())
    assert report["column"] == "a"
    assert all(v["pass"] for v in report["targets"].values())
    assert (tmp_path / "plot_fit_a.csv").is_file()


@pytest.mark.parametrize("N,p,l", [(5, 2.0, 5.0), (4, 2.0, 6.0), (4, 2.5, 9.0)])
def test_verify_passes(tmp_path, N, p, l):
    args = ["verify", "--out", str(tmp_path), "--set", f"problem.N={N}", "--set", f"problem.p={p}"]
    assert main([*args, "--set", "problem.q=pstar", "--set", f"problem.l={l}"]) == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["all_pass"]


def test_run_sweep_rejects_empty_grid():
    with pytest.raises(ParameterError):
        run_sweep(ProblemParams(3, 2.0, 4.0, 6.0), [])
