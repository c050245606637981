"""Subcommands, exit codes, and output files of the command-line driver."""

import json
from math import sqrt

import pytest

from focklab.cli import main


@pytest.fixture
def theta_config(tmp_path):
    doc = {
        "mode_system": {
            "geometry": "dense",
            "h": [[0, -1], [-1, 0]],
            "v": [[1, 0], [0, 1]],
        },
        "state": {"family": "theta", "phi": [[0.8, 0], [0.36, 0.48]],
                  "m": 1, "excitation_seed": 0},
        "n_list": [4, 6, 8],
        "t_list": [0.5],
        "tolerances": {"hartree_tol": 1e-12},
        "seed": 7,
        "output": {"dir": str(tmp_path / "out"), "format": "csv"},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path, doc, tmp_path


def test_check_quick_passes(capsys):
    assert main(["check", "--level", "quick"]) == 0
    out = capsys.readouterr().out
    assert "suite: PASS" in out


def test_converge_writes_csv_and_fits(theta_config, capsys):
    path, doc, tmp = theta_config
    assert main(["converge", "--config", str(path)]) == 0
    out_csv = tmp / "out" / "convergence.csv"
    assert out_csv.exists()
    lines = out_csv.read_text().splitlines()
    assert lines[0].startswith("n,m,t,trace_dist")
    assert len(lines) == 4
    assert "slope" in capsys.readouterr().out


def test_converge_deterministic_across_runs(theta_config):
    path, doc, tmp = theta_config
    main(["converge", "--config", str(path), "--out", str(tmp / "r1")])
    main(["converge", "--config", str(path), "--out", str(tmp / "r2")])
    b1 = (tmp / "r1" / "convergence.csv").read_bytes()
    b2 = (tmp / "r2" / "convergence.csv").read_bytes()
    assert b1 == b2


def test_seed_flag_overrides(theta_config):
    path, doc, tmp = theta_config
    main(["converge", "--config", str(path), "--out", str(tmp / "s1"), "--seed", "1"])
    main(["converge", "--config", str(path), "--out", str(tmp / "s2"), "--seed", "2"])
    b1 = (tmp / "s1" / "convergence.csv").read_bytes()
    b2 = (tmp / "s2" / "convergence.csv").read_bytes()
    assert b1 != b2  # different excitation draws


def test_superpose_subcommand(tmp_path):
    c = 1 / sqrt(2)
    doc = {
        "mode_system": {"geometry": "dense", "h": [[0, -1], [-1, 0]],
                        "v": [[1, 0], [0, 1]]},
        "state": {"family": "superposition", "kind": "product",
                  "components": [
                      {"phi": [[1, 0], [0, 0]], "coeff": [c, 0]},
                      {"phi": [[0.5, 0], [0.8660254037844386, 0]], "coeff": [c, 0]},
                  ]},
        "n_list": [4, 6], "t_list": [0.5],
        "seed": 1, "output": {"dir": str(tmp_path), "format": "json"},
    }
    cfg = tmp_path / "sup.json"
    cfg.write_text(json.dumps(doc))
    assert main(["superpose", "--config", str(cfg)]) == 0
    report = json.loads((tmp_path / "superposition.json").read_text())
    assert len(report["rows"]) == 2
    assert report["rows"][0]["cross_term"] == pytest.approx(0.5**4, abs=1e-8)


def test_hartree_export(theta_config):
    path, doc, tmp = theta_config
    assert main(["hartree", "--config", str(path)]) == 0
    csv_path = tmp / "out" / "hartree_trajectory.csv"
    assert csv_path.exists()
    assert csv_path.read_text().splitlines()[0].startswith("t,re_phi_0")


def test_fit_subcommand(theta_config, capsys):
    path, doc, tmp = theta_config
    main(["converge", "--config", str(path)])
    capsys.readouterr()
    rc = main(["fit", str(tmp / "out" / "convergence.csv"), "--t", "0.5",
               "--format", "json"])
    assert rc == 0
    fit = json.loads(capsys.readouterr().out)
    assert fit["slope"] < -0.4
    assert fit["r2"] > 0.9


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"mode_system": {}, "state": {}, "n_list": [],
                               "t_list": [], "bogus": 1}))
    assert main(["converge", "--config", str(bad)]) == 2


def test_invalid_json_exit_code(tmp_path):
    bad = tmp_path / "nonjson.json"
    bad.write_text("{not json")
    assert main(["converge", "--config", str(bad)]) == 2


def test_capacity_error_exit_code(theta_config):
    path, doc, tmp = theta_config
    doc = dict(doc)
    doc["state"] = {"family": "coherent", "phi": [[0.8, 0], [0.36, 0.48]]}
    doc["n_list"] = [5000]
    big = tmp / "big.json"
    big.write_text(json.dumps(doc))
    assert main(["converge", "--config", str(big)]) == 3


def test_check_negative_exit_is_one(monkeypatch, capsys):
    # force a failing suite through the public entry point
    import focklab.cli as cli

    class FakeReport:
        passed = False

        def summary(self):
            return "[FAIL] forced"

        def to_json(self, path=None):
            return {}

    monkeypatch.setattr(cli, "run_invariant_suite",
                        lambda level, rng_seed: FakeReport())
    assert main(["check", "--level", "quick"]) == 1
