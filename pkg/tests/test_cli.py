import csv
import io
import json
import math

import pytest

from evsys.cli import main


def run(argv, capsys=None):
    buf = io.StringIO()
    code = main([str(a) for a in argv], out=buf)
    return code, buf.getvalue()


@pytest.fixture
def sysfile(systems_dir):
    return lambda name: systems_dir / name


def test_validate_example(sysfile):
    code, out = run(["validate", sysfile("strong_equilibrium.txt")])
    assert code == 0
    assert out.splitlines() == ["6 - X1*X2", "2*X2^2 - 9*X1"]


@pytest.mark.parametrize(
    "text, fragment",
    [("A <-> B ; kf=1 kr=0", "rates must be positive"), ("A <-> A ; kf=1 kr=1", "M != N"), ("A -> B ; kf=1 kr=1", "irreversible")],
)
def test_validate_errors(tmp_path, capsys, text, fragment):
    f = tmp_path / "bad.txt"
    f.write_text(text)
    code, _ = run(["validate", f])
    assert code == 2
    assert fragment in capsys.readouterr().err


def test_missing_file(tmp_path):
    code, _ = run(["validate", tmp_path / "nope.txt"])
    assert code == 2


def test_analyze_energy_cycle(sysfile):
    code, out = run(["analyze", sysfile("energy_cycle.txt")])
    assert code == 3
    assert f"weight={math.log(2):.12f}" in out or f"weight={-math.log(2):.12f}" in out
    assert "product=2" in out


def test_analyze_atomic(sysfile):
    code, out = run(["analyze", sysfile("atomic.txt"), "--json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == "1"
    assert doc["atomicity"]["status"] == "atomic"
    assert doc["atomicity"]["atoms"] == ["X4", "X5"]
    assert [law["vector"] for law in doc["atom_conservation_laws"]] == [[2, 2, 0, 1, 0], [2, 0, 2, 0, 1]]
    assert doc["naturality"]["natural"] is True
    assert doc["config"]["budget_degree"] == {"value": 9, "source": "default"}


def test_analyze_single_reaction(sysfile):
    code, out = run(["analyze", sysfile("isomer.txt"), "--json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["left_kernel"] == []
    assert doc["right_kernel"] == [[1, 1]]


def test_analyze_unknown_sets_bit(tmp_path):
    f = tmp_path / "s.txt"
    f.write_text("species: X1 X2\n0 <-> X1 + X2 ; kf=1 kr=1\n")
    assert run(["analyze", f])[0] == 4
    g = tmp_path / "t.txt"
    g.write_text("species: X1 X2\n0 <-> X1 + X2 ; kf=1 kr=1\n0 <-> X1 + X2 ; kf=1 kr=2\n")
    assert run(["analyze", g])[0] == 7


def test_json_is_deterministic(sysfile):
    a = run(["report", sysfile("atomic.txt"), "--json", "--at", "1,2,3,0.5,0.1"])
    b = run(["report", sysfile("atomic.txt"), "--json", "--at", "1,2,3,0.5,0.1"])
    assert a == b
    doc = json.loads(a[1])
    assert doc["equilibrium"]["classes"][0]["class_residual"] < 1e-12


def test_budget_precedence(sysfile, monkeypatch):
    monkeypatch.setenv("EVSYS_BUDGET_DEGREE", "5")
    doc = json.loads(run(["analyze", sysfile("atomic.txt"), "--json"])[1])
    assert doc["config"]["budget_degree"] == {"value": 5, "source": "env"}
    doc = json.loads(run(["analyze", sysfile("atomic.txt"), "--json", "--budget-degree", "7"])[1])
    assert doc["config"]["budget_degree"] == {"value": 7, "source": "flag"}
    monkeypatch.setenv("EVSYS_BUDGET_NODES", "many")
    assert run(["analyze", sysfile("atomic.txt")])[0] == 2


def test_tiny_budget_reports_unknown(sysfile):
    code, out = run(["analyze", sysfile("atomic.txt"), "--budget-nodes", "1", "--json"])
    assert code == 4
    assert json.loads(out)["atomicity"]["status"] == "unknown"


def test_equilibrium_commands(sysfile):
    code, out = run(["equilibrium", sysfile("strong_equilibrium.txt"), "--json"])
    assert code == 0
    base = json.loads(out)["equilibrium"]["base"]
    assert base == pytest.approx([2, 3], rel=1e-9)
    code, out = run(["equilibrium", sysfile("isomer.txt"), "--at", "2,1", "--json"])
    (cl,) = json.loads(out)["equilibrium"]["classes"]
    assert cl["c"] == pytest.approx([1, 2], rel=1e-12)
    code, out = run(["equilibrium", sysfile("energy_cycle.txt")])
    assert code == 3
    assert "not natural" in out


def test_equilibrium_jobs(sysfile):
    pts = ["2,1", "0.5,2.5", "1.5,1.5", "2.9,0.1"]
    args = ["equilibrium", sysfile("isomer.txt"), "--json"]
    for p in pts:
        args += ["--at", p]
    serial = run(args)
    parallel = run(args + ["--jobs", "3"])
    assert serial == parallel
    assert len(json.loads(serial[1])["equilibrium"]["classes"]) == 4


def test_equilibrium_bad_point(sysfile, capsys):
    assert run(["equilibrium", sysfile("isomer.txt"), "--at", "1,2,3"])[0] == 2
    code, out = run(["equilibrium", sysfile("isomer.txt"), "--at", "3,0", "--json"])
    assert code == 0
    assert "error" in json.loads(out)["equilibrium"]["classes"][0]


def test_simulate_to_equilibrium(sysfile, tmp_path):
    out_csv = tmp_path / "traj.csv"
    code, out = run(["simulate", sysfile("strong_equilibrium.txt"), "--x0", "4,1", "--to-equilibrium", "--out", out_csv, "--json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["equilibrium_run"]["converged"]
    assert doc["equilibrium_run"]["state"] == pytest.approx([2, 3], rel=1e-6)
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["t", "X1", "X2", "lyapunov", "rhs_norm"]
    assert [float(v) for v in rows[1][:3]] == [0.0, 4.0, 1.0]


def test_simulate_atomic_crosscheck(sysfile):
    code, out = run(["simulate", sysfile("atomic.txt"), "--x0", "1,2,3,0.5,0.1", "--to-equilibrium"])
    assert code == 0
    assert "agrees" in out


def test_simulate_at_equilibrium(sysfile):
    code, out = run(["simulate", sysfile("isomer.txt"), "--x0", "1,2", "--to-equilibrium", "--json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["trajectory"]["accepted_steps"] == 0


def test_simulate_non_natural(sysfile):
    code, out = run(["simulate", sysfile("energy_cycle.txt"), "--x0", "1,1", "--t-end", "2"])
    assert code == 0
    assert "not natural" in out


def test_simulate_env_and_failure(sysfile, monkeypatch):
    monkeypatch.setenv("EVSYS_T_END", "0.5")
    monkeypatch.setenv("EVSYS_REL_TOL", "1e-6")
    doc = json.loads(run(["simulate", sysfile("isomer.txt"), "--x0", "3,0", "--json"])[1])
    assert doc["trajectory"]["final_time"] == 0.5
    assert doc["config"]["rel_tol"] == {"value": 1e-6, "source": "env"}
    assert doc["config"]["abs_tol"]["source"] == "default"
    code, _ = run(["simulate", sysfile("isomer.txt"), "--x0", "3,0", "--max-steps", "2"])
    assert code == 5
    code, _ = run(["simulate", sysfile("isomer.txt"), "--x0", "3,0", "--rel-tol", "1e-40", "--abs-tol", "1e-40"])
    assert code == 5
    code, _ = run(["simulate", sysfile("isomer.txt"), "--x0=-1,0"])
    assert code == 2


def test_report_human(sysfile):
    code, out = run(["report", sysfile("strong_equilibrium.txt")])
    assert code == 4  # constant event side: atomicity criterion does not apply
    assert "atomicity: unknown" in out
    assert "base equilibrium: X1=2.0" in out or "base equilibrium: X1=1.99999999" in out


def test_console_script_entry_point():
    from importlib.metadata import entry_points

    (ep,) = [e for e in entry_points(group="console_scripts") if e.name == "evsys"]
    assert ep.value == "evsys.cli:main"
