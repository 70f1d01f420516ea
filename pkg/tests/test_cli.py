"""End-to-end CLI contract: exit codes, payloads, figures, determinism."""

import json
import subprocess
import sys

import numpy as np
import pytest

from circlespec import coeffs_load


def run_cli(*argv, cwd=None):
    return subprocess.run([sys.executable, "-m", "circlespec.cli", *argv],
                          capture_output=True, text=True, cwd=cwd)


def test_matrix_default(tmp_path):
    out = tmp_path / "m.json"
    r = run_cli("matrix", "--out", str(out), "--figdir", str(tmp_path))
    assert r.returncode == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == "1"
    assert doc["canonical_check"] is True
    assert doc["doubly_stochastic"] is True
    assert doc["char_poly"]["factored"] == \
        "(lambda - 1) (lambda - 2/3) lambda^2 (lambda^2 + 1/3 lambda - 1/3)"
    assert doc["v2"] == ["1", "(3+sqrt(13))/2", "(-5-sqrt(13))/2",
                         "(-5-sqrt(13))/2", "(3+sqrt(13))/2", "1"]
    fig = tmp_path / "matrix_spectrum.png"
    assert fig.exists() and fig.stat().st_size > 1000


def test_matrix_deterministic(tmp_path):
    outs = []
    for k in (1, 2):
        out = tmp_path / ("det%d.json" % k)
        r = run_cli("matrix", "--out", str(out), "--figdir", str(tmp_path))
        assert r.returncode == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_matrix_csv(tmp_path):
    r = run_cli("matrix", "--format", "csv")
    assert r.returncode == 0
    assert r.stdout.splitlines()[0] == "2/3,1/3,0,0,0,0"


def test_matrix_non_canonical_map():
    r = run_cli("matrix", "--map", "doubling")
    assert r.returncode == 0
    doc = json.loads(r.stdout[:r.stdout.rindex("}") + 1])
    assert doc["canonical_check"] is None
    assert doc["q"] == 1


def test_map_info():
    r = run_cli("map-info")
    assert r.returncode == 0
    doc = json.loads(r.stdout[:r.stdout.rindex("}") + 1])
    assert doc["markov"] is True and doc["markov_q"] == 6
    assert len(doc["singular_set"]) == 12


def test_ly_quick(tmp_path):
    out = tmp_path / "ly.json"
    r = run_cli("ly", "--battery", "2", "--n-max", "4",
                "--out", str(out), "--figdir", str(tmp_path))
    assert r.returncode == 0
    doc = json.loads(out.read_text())
    assert doc["M"] == 15 and doc["lambda"] == "3" and doc["D"] == "12"
    assert doc["F"] == pytest.approx(3 / 0.7 ** 14, rel=1e-9)
    assert doc["seed"] == 13
    assert doc["all_passed"] is True
    assert (tmp_path / "ly_margins.png").exists()


def test_ly_bad_kappa():
    r = run_cli("ly", "--kappa", "0.6")
    assert r.returncode == 2
    assert "error:" in r.stderr


def test_approx_battery(tmp_path):
    out = tmp_path / "a.json"
    r = run_cli("approx", "--delta", "0.1", "--out", str(out),
                "--figdir", str(tmp_path))
    assert r.returncode == 0
    doc = json.loads(out.read_text())
    assert doc["seed"] == 13
    assert len(doc["rows"]) == 10
    assert all(row["passed"] for row in doc["rows"])
    assert (tmp_path / "approx_bound.png").exists()


def test_spectrum_exit_codes(tmp_path):
    r = run_cli("spectrum", "--delta", "0")
    assert r.returncode == 2
    r = run_cli("spectrum", "--delta", "0.1", "--N", "129")
    assert r.returncode == 3
    out = tmp_path / "s.json"
    r = run_cli("spectrum", "--delta", "0.01", "--N", "257",
                "--out", str(out), "--figdir", str(tmp_path))
    assert r.returncode == 1          # identified but modulus below 0.75
    doc = json.loads(out.read_text())
    assert doc["lambda_delta"]["re"] == pytest.approx(-0.690591, abs=5e-5)
    assert doc["two_outside"] is False
    assert doc["ess_radius_bound"] == pytest.approx(2 / 3, abs=1e-3)
    assert doc["decay"]["rho_hat"] > 0


def test_sweep_short(tmp_path):
    out = tmp_path / "sweep.csv"
    r = run_cli("sweep", "--delta-sweep", "1e-2:1e-1:2",
                "--out", str(out), "--figdir", str(tmp_path))
    assert r.returncode == 1          # converged rows, no theorem row yet
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "delta,re,im,abs,gap,ess_bound,N_used,converged,identified"
    assert len(lines) == 3
    assert (tmp_path / "sweep.png").exists()


def test_sweep_rejects_bad_range():
    r = run_cli("sweep", "--delta-sweep", "nonsense")
    assert r.returncode == 2


def test_eigenfunction_with_dump(tmp_path):
    out = tmp_path / "e.json"
    dump = tmp_path / "coeffs.bin"
    r = run_cli("eigenfunction", "--delta", "0.01", "--N", "257",
                "--coeffs", str(dump), "--out", str(out),
                "--figdir", str(tmp_path))
    assert r.returncode == 0
    doc = json.loads(out.read_text())
    assert doc["eigenvalue"]["re"] == pytest.approx(-0.690591, abs=5e-5)
    assert doc["decay"]["fit_r2"] > 0.98
    coeffs, delta, target = coeffs_load(str(dump))
    assert delta == 0.01
    assert len(coeffs) == 257
    assert target.real == pytest.approx(doc["eigenvalue"]["re"], abs=1e-12)
    assert (tmp_path / "eigenfunction.png").exists()


def test_map_file_and_schema_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"p": 2, "breaks": [0.0, 2.0], "slopes": [0.5]}')
    r = run_cli("matrix", "--map", str(bad))
    assert r.returncode == 2
    r = run_cli("matrix", "--map", str(tmp_path / "missing.json"))
    assert r.returncode == 2


def test_config_merge_and_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"delta": 0.1, "seed": 99}))
    out = tmp_path / "a.json"
    r = run_cli("approx", "--config", str(cfg), "--out", str(out))
    assert r.returncode == 0
    doc = json.loads(out.read_text())
    assert doc["seed"] == 99
    assert {row["delta"] for row in doc["rows"]} == {0.1}
    # explicit flag beats the config file
    r = run_cli("approx", "--config", str(cfg), "--delta", "0.05",
                "--out", str(out))
    assert r.returncode == 0
    doc = json.loads(out.read_text())
    assert {row["delta"] for row in doc["rows"]} == {0.05}


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    r = run_cli("approx", "--config", str(cfg))
    assert r.returncode == 2
    assert "bogus" in r.stderr


def test_unknown_subcommand():
    r = run_cli("frobnicate")
    assert r.returncode == 2
