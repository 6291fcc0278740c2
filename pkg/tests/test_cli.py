"""
End-to-end tests of the command-line verbs through main.run.
"""

import json

import pytest

from gridstore.main import run


@pytest.fixture
def model_path(models_dir):
    return lambda name: str(models_dir / name)


def test_solve_counterexample(model_path, capsys):
    code = run(["solve", model_path("counterexample.json"), "--budget", "5"])
    out = capsys.readouterr().out
    assert code == 0
    assert "status: optimal" in out
    assert "objective: 877.000" in out


def test_solve_pinned_counterexample(model_path, capsys):
    code = run(["solve", model_path("counterexample.json"), "--budget", "5", "--pin-zero", "1"])
    assert code == 0
    assert "objective: 900.750" in capsys.readouterr().out


def test_solve_infeasible_model_prints_hints(model_path, capsys):
    code = run(["solve", model_path("sgsl.json"), "--budget", "0"])
    captured = capsys.readouterr()
    assert code == 2
    assert "status: infeasible" in captured.out
    assert "hint: h_min at this cap is 0.5" in captured.err


def test_solve_infeasible_model_honors_csv_format(model_path, capsys):
    code = run(["solve", model_path("sgsl.json"), "--budget", "0", "--format", "csv"])
    out = capsys.readouterr().out.splitlines()
    assert code == 2
    assert out[0] == "quantity,value"
    assert out[1] == "status,infeasible"
    assert out[2].startswith("phase1_violation,")


def test_solve_with_cap_override(model_path, capsys):
    """Raising the line cap to 10 makes the zero-budget SGSL model feasible."""
    code = run(["solve", model_path("sgsl.json"), "--budget", "0", "--override", "f_1-2=10"])
    assert code == 0
    assert "status: optimal" in capsys.readouterr().out


def test_solve_rejects_negative_budget(model_path, capsys):
    code = run(["solve", model_path("sgsl.json"), "--budget", "-1"])
    assert code == 1
    assert "error [USAGE_ERROR]" in capsys.readouterr().err


def test_solve_missing_file(tmp_path, capsys):
    code = run(["solve", str(tmp_path / "missing.json")])
    assert code == 1
    assert "error [" in capsys.readouterr().err


def test_solve_malformed_file(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"period": 2,\n  "buses": [}', encoding="utf-8")
    assert run(["solve", str(path)]) == 1
    assert "error [PARSE_ERROR]" in capsys.readouterr().err


def test_solve_rejects_nan_demand(model_path, tmp_path, capsys):
    text = open(model_path("sgsl.json"), encoding="utf-8").read()
    doc = json.loads(text)
    doc["demand"]["2"][1] = "__nan__"
    path = tmp_path / "nan.json"
    path.write_text(json.dumps(doc).replace('"__nan__"', "NaN"), encoding="utf-8")
    assert run(["solve", str(path), "--budget", "5"]) == 1
    err = capsys.readouterr().err
    assert "error [PARSE_ERROR]" in err
    assert "NaN" in err


def test_solve_csv_profiles(model_path, tmp_path):
    target = tmp_path / "profiles.csv"
    code = run(["solve", model_path("sgsl.json"), "--budget", "5", "--format", "csv", "--output", str(target)])
    assert code == 0
    lines = target.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# status=optimal")
    assert lines[1] == "bus,t,g,gamma,delta,s"
    assert len(lines) == 2 + 2 * 4


def test_solve_purify_transfer(model_path, capsys):
    code = run(["solve", model_path("sample7.json"), "--budget", "4", "--purify-transfer"])
    out = capsys.readouterr().out
    assert code == 0
    rows = dict(line.split(": ", 1) for line in out.splitlines())
    assert float(rows["b[1]"]) == 0.0
    assert float(rows["b[2]"]) == 0.0


def test_solve_dump_program(model_path, tmp_path):
    target = tmp_path / "program.txt"
    assert run(["solve", model_path("sgsl.json"), "--budget", "5", "--dump-program", str(target)]) == 0
    assert target.read_text(encoding="utf-8").startswith("# Q ")


def test_analytic_sgsl(model_path, capsys):
    code = run(["analytic", model_path("sgsl.json"), "--budget", "5"])
    out = capsys.readouterr().out
    assert code == 0
    rows = dict(line.split(": ", 1) for line in out.splitlines())
    assert rows["topology"] == "sgsl"
    assert rows["feasible"] == "yes"
    assert float(rows["f_min"]) == pytest.approx(9.5)
    assert float(rows["h_min"]) == pytest.approx(0.5)
    assert float(rows["h_sat"]) == pytest.approx(5.0)
    assert rows["tau"] == "0 2 4"


def test_analytic_sgsl_without_budget_reports_infeasible(model_path, capsys):
    code = run(["analytic", model_path("sgsl.json"), "--budget", "0"])
    rows = dict(line.split(": ", 1) for line in capsys.readouterr().out.splitlines())
    assert code == 0
    assert rows["feasible"] == "no"
    assert float(rows["f_min"]) == pytest.approx(10.0)
    assert float(rows["h_min"]) == pytest.approx(0.5)
    assert float(rows["h_sat"]) == pytest.approx(5.0)


def test_analytic_star_csv(model_path, capsys):
    code = run(["analytic", model_path("counterexample.json"), "--budget", "5", "--format", "csv"])
    out = capsys.readouterr().out.splitlines()
    assert code == 0
    assert out[0] == "quantity,value"
    assert "h_min,2" in out


def test_analytic_rejects_general_network(model_path, capsys):
    assert run(["analytic", model_path("sample7.json")]) == 1
    err = capsys.readouterr().err
    assert "error [TOPOLOGY_UNSUPPORTED]" in err
    assert "hint:" in err


def test_sweep_csv(model_path, capsys):
    code = run(["sweep", model_path("sgsl.json"), "--param", "budget", "--grid", "0:8:5"])
    out = capsys.readouterr().out.splitlines()
    assert code == 0
    assert out[0] == "param,variant,status,objective,iters,max_residual"
    assert len(out) == 6
    assert out[1].startswith("0,none,infeasible,nan")


def test_sweep_text_summary(model_path, capsys):
    code = run([
        "sweep", model_path("counterexample.json"), "--param", "budget", "--grid", "1,2.5,5",
        "--variant", "none", "--variant", "1", "--format", "text",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "first_feasible" in out


def test_sweep_rejects_budget_with_budget_param(model_path, capsys):
    code = run(["sweep", model_path("sgsl.json"), "--param", "budget", "--grid", "1,2", "--budget", "3"])
    assert code == 1
    assert "error [USAGE_ERROR]" in capsys.readouterr().err


def test_counterexample_verb(capsys):
    assert run(["counterexample"]) == 0
    out = capsys.readouterr().out
    assert "p_star: 877.000000" in out
    assert "pi_star: 900.750000" in out


def test_verify_theorem1_verb(capsys):
    code = run(["verify-theorem1", "--seed", "2", "--trials", "3", "--max-buses", "4", "--max-period", "3"])
    assert code == 0
    assert "trials=3" in capsys.readouterr().out


def test_missing_verb_is_usage_error(capsys):
    assert run([]) == 1
    assert "error [USAGE_ERROR]" in capsys.readouterr().err
