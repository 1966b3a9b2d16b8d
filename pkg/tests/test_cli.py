import csv
import subprocess
import sys
from pathlib import Path

import pytest

from zohcbf.cli import main


def run_cli(args, **kw):
    return main(args)


def test_margins_table_static_all_zero(tmp_path, capsys):
    code = run_cli(["margins-table", "--system", "static", "--T", "0.1",
                    "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "margins_static_T0.1.csv").open()))
    assert [r["variant"] for r in rows] == ["nu0g", "nu1g", "nu2g", "nu3g"]
    for r in rows:
        assert abs(float(r["nu"])) <= 1e-9  # f = g = 0: every margin vanishes
    assert {"samples", "inflation", "seed"} <= set(rows[0].keys())


def test_margins_table_reproducible_bytes(tmp_path):
    run_cli(["margins-table", "--system", "integrator1d", "--T", "0.1",
             "--seed", "4", "--out", str(tmp_path / "a")])
    run_cli(["margins-table", "--system", "integrator1d", "--T", "0.1",
             "--seed", "4", "--out", str(tmp_path / "b")])
    fa = (tmp_path / "a" / "margins_integrator1d_T0.1.csv").read_bytes()
    fb = (tmp_path / "b" / "margins_integrator1d_T0.1.csv").read_bytes()
    assert fa == fb


def test_physical_table_csv(tmp_path):
    code = run_cli(["physical-table", "--system", "integrator1d",
                    "--T", "0.1,0.01", "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "physical_integrator1d.csv").open()))
    assert len(rows) == 8
    assert set(rows[0].keys()) == {"variant", "T", "delta_inf"}


def test_simulate_all_variants_one_file_each(tmp_path):
    code = run_cli(["simulate", "--system", "integrator1d", "--variant", "all",
                    "--T", "0.1", "--duration", "0.5", "--out", str(tmp_path)])
    assert code == 0
    names = sorted(p.name for p in tmp_path.glob("*.csv"))
    assert names == sorted(
        f"integrator1d_{v}_T0.1_seed0.csv"
        for v in ("phi0g", "phi1l", "phi1g", "phi2l", "phi2g", "phi3l", "phi3g")
    )


def test_sweep_merges_deterministically(tmp_path):
    code = run_cli(["sweep", "--system", "integrator1d", "--variant", "phi3l,phi2l",
                    "--T", "0.1,0.05", "--seeds", "0,1", "--duration", "0.5",
                    "--workers", "2", "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "sweep_integrator1d.csv").open()))
    assert len(rows) == 8
    keys = [(r["variant"], r["T"], r["seed"]) for r in rows]
    assert keys == sorted(keys)


def test_unknown_flag_exits_2():
    proc = subprocess.run(
        [sys.executable, "-m", "zohcbf.cli", "margins-table", "--bogus"],
        capture_output=True,
    )
    assert proc.returncode == 2


def test_missing_config_exits_2():
    proc = subprocess.run(
        [sys.executable, "-m", "zohcbf.cli", "margins-table", "--system", "static",
         "--config", "/nonexistent/path.ini"],
        capture_output=True,
    )
    assert proc.returncode == 2


def test_config_file_engine_section(tmp_path):
    cfgfile = tmp_path / "c.ini"
    cfgfile.write_text("[engine]\nbudget = 128\nseed = 9\n")
    code = run_cli(["margins-table", "--system", "integrator1d", "--T", "0.1",
                    "--config", str(cfgfile), "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "margins_integrator1d_T0.1.csv").open()))
    assert rows[0]["samples"] == "128"
    assert rows[0]["seed"] == "9"


def test_verify_subset_exit_zero():
    assert run_cli(["verify", "--checks", "displacement-bound"]) == 0
