from __future__ import annotations

import json

import numpy as np
import pytest

from conftest import random_system
from smale.algebra import DegreePattern, evaluate, point_from_list, system_from_dict, system_to_dict
from smale.cli import RunConfig, main
from smale.solvers import build_U

P22 = DegreePattern.of((2, 2))


@pytest.fixture
def system_file(tmp_path, rng):
    path = tmp_path / "f.json"
    path.write_text(json.dumps(system_to_dict(random_system(P22, rng))))
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_version_prints_constants(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("smale ")
    assert "lambda = 0.00753" in lines and "C = 0.025" in lines and "epsilon = 0.13" in lines
    assert lines[-1].startswith("u0 = 0.35424868")


def test_no_command_and_bad_flags_are_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "solve")[0] == 2
    assert run(capsys, "experiment", "avg-k", "--degrees", "2", "2")[0] == 2
    assert run(capsys, "sample", "rho-st", "--degrees", "2", "2", "--n", "3")[0] == 2


def test_solve_lv_writes_result_and_trace(capsys, tmp_path, system_file):
    trace = tmp_path / "trace.jsonl"
    code, out, _ = run(capsys, "solve", "--input", system_file, "--seed", 4, "--trace", trace)
    assert code == 0
    res = json.loads(out)
    assert res["algorithm"] == "lv" and res["certified"] and res["seed"] == 4
    f = system_from_dict(json.loads(system_file.read_text()))
    z = point_from_list(res["zero"])
    assert np.linalg.norm(evaluate(f, z)) <= 1e-10 * f.norm
    lines = trace.read_text().splitlines()
    assert json.loads(lines[0])["k"] == res["iterations"] == len(lines) - 1


def test_solve_all_and_md(capsys, tmp_path, system_file):
    out_file = tmp_path / "all.json"
    code, _, _ = run(capsys, "solve", "--algorithm", "all", "--input", system_file, "--out", out_file)
    assert code == 0
    results = json.loads(out_file.read_text())["results"]
    assert len(results) == 4 and all(r["certified"] for r in results)
    code, out, _ = run(capsys, "solve", "--algorithm", "md", "--input", system_file)
    assert code == 0 and json.loads(out)["algorithm"] == "md"


def test_solve_failure_reports_start_pair(capsys, system_file):
    code, _, err = run(capsys, "solve", "--input", system_file, "--max-iters", 3)
    assert code == 1
    info = json.loads(err)
    assert info["error"] == "NonConvergenceError" and info["iterations"] == 3
    g = system_from_dict(info["start"]["g"])
    zeta = point_from_list(info["start"]["zeta"])
    assert np.linalg.norm(evaluate(g, zeta)) <= 1e-10 * g.norm


def test_malformed_json_reports_position(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"degrees": [2, 2],\n  "coeffs": [1, 2,, 3]}')
    code, _, err = run(capsys, "solve", "--input", bad)
    assert code == 2
    assert "line 2 column" in err
    bad.write_text('{"degrees": [2, 2]}')
    assert run(capsys, "solve", "--input", bad)[0] == 2
    assert run(capsys, "solve", "--input", tmp_path / "missing.json")[0] == 2


def test_sample_rho_st_lines(capsys):
    code, out, _ = run(capsys, "sample", "rho-st", "--degrees", "2", "3", "--count", 3, "--seed", 1)
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 3
    for line in lines:
        rec = json.loads(line)
        g, zeta = system_from_dict(rec["g"]), point_from_list(rec["zeta"])
        assert g.pattern.degrees == (2, 3)
        assert np.linalg.norm(evaluate(g, zeta)) <= 1e-10 * g.norm
    assert run(capsys, "sample", "rho-st", "--degrees", "2,3", "--count", 3, "--seed", 1)[1] == out


def test_experiment_ledger_report_and_replay(capsys, tmp_path):
    ledger = tmp_path / "results.jsonl"
    cfg = tmp_path / "cfg.json"
    code, out, _ = run(capsys, "experiment", "avg-k", "--degrees", "2", "2", "--trials", 30,
                       "--seed", 5, "--out", ledger, "--save-config", cfg)
    assert code == 0 and out.splitlines()[0].startswith("kind")
    saved = RunConfig.from_dict(json.loads(cfg.read_text()))
    assert saved.command == "experiment" and saved.degrees == [2, 2] and saved.seed == 5
    assert run(capsys, "--config", cfg)[0] == 0
    first, second = (json.loads(line) for line in ledger.read_text().splitlines())
    assert first["estimate"] == second["estimate"] and first["kind"] == "avg_k"

    code, out, _ = run(capsys, "report", "--ledger", ledger, "--format", "csv")
    assert code == 0 and len(out.splitlines()) == 3
    assert run(capsys, "experiment", "avg-k", "--degrees", "2", "2", "--trials", 5, "--out", ledger)[0] == 2


def test_experiment_with_center_file(capsys, tmp_path):
    center = tmp_path / "center.json"
    center.write_text(json.dumps(system_to_dict(build_U(P22)[0])))
    ledger = tmp_path / "r.jsonl"
    code, _, _ = run(capsys, "experiment", "smoothed-k", "--degrees", "2", "2", "--trials", 30,
                     "--sigma", 0.5, "--center", center, "--out", ledger)
    assert code == 0
    (rec,) = [json.loads(line) for line in ledger.read_text().splitlines()]
    assert rec["params"]["sigma"] == 0.5 and rec["passed"]


def test_report_rejects_malformed_ledger(capsys, tmp_path):
    ledger = tmp_path / "r.jsonl"
    ledger.write_text("{not json}\n")
    code, _, err = run(capsys, "report", "--ledger", ledger)
    assert code == 2 and "line 1 column" in err


def test_config_replay_rejects_unknown_fields(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "report", "bogus": 1}))
    assert run(capsys, "--config", cfg)[0] == 2
