import json
import math

import pytest

from bellineq.cli import main
from bellineq.database import SessionLocal
from bellineq.repository import runs as runs_repo
from bellineq.repository.polynomial import chsh
from bellineq.schemas.polynomial import PolynomialIO


@pytest.fixture
def chsh_file(tmp_path):
    path = tmp_path / "chsh.json"
    path.write_text(PolynomialIO.from_polynomial(chsh(1)).model_dump_json())
    return path


def test_construct_preset(capsys):
    assert main(["--no-ledger", "construct", "--preset", "mabk"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["name"] == "mabk"
    assert out["bound"] == "2/1"
    assert len(out["terms"]) == 4


def test_construct_primitive_and_raw(capsys):
    assert main(["--no-ledger", "construct", "--u", "2", "--r", "8", "--s", "4", "--t", "4"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["bound"] == "8/1"
    assert len(out["terms"]) == 20

    assert main(["--no-ledger", "construct", "--u", "2", "--r", "8", "--s", "4", "--t", "4", "--raw"]) == 0
    assert json.loads(capsys.readouterr().out)["bound"] == "4/1"


def test_construct_refuses_violated_constraints(capsys):
    assert main(["--no-ledger", "construct", "--u", "0", "--r", "1"]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    for name in ("r-s <= 2u", "r-t <= 2u", "r-s-t <= 0"):
        assert name in captured.err

    assert main(["--no-ledger", "construct", "--u", "0", "--r", "1", "--force"]) == 0
    assert json.loads(capsys.readouterr().out)["arity"] == 3


def test_negative_parameter_is_a_range_error(capsys):
    assert main(["--no-ledger", "construct", "--u", "-1"]) == 2


def test_lhv_bound(capsys):
    assert main(["--no-ledger", "lhv", "mabk"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["max"] == "2/1"
    assert out["matches_declared"] is True
    assert out["vertices"] == 64


def test_malformed_input(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("not json")
    assert main(["--no-ledger", "lhv", str(bad)]) == 1
    assert main(["--no-ledger", "lhv", str(tmp_path / "missing.json")]) == 1


def test_qmax_fixed_settings(chsh_file, capsys):
    assert main(["--no-ledger", "qmax", str(chsh_file), "--settings", "fixed"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["value"] == pytest.approx(2 * math.sqrt(2), abs=1e-9)
    assert out["bound"] == "2/1"


def test_qmax_is_byte_identical_across_runs(tmp_path, capsys):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for path in (first, second):
        args = ["--no-ledger", "qmax", "mabk", "--restarts", "2", "--seed", "7", "--out", str(path)]
        assert main(args) == 0
    assert first.read_bytes() == second.read_bytes()
    sidecar = json.loads((tmp_path / "a.json.manifest.json").read_text())
    assert sidecar["run_id"] == json.loads(first.read_text())["run_id"]
    assert sidecar["seed"] == 7


def test_sweep_eprime_csv(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    assert main(["--no-ledger", "sweep", "--family", "eprime", "--r-max", "10", "--steps", "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "r,lambda_max"
    assert len(lines) == 3
    assert "asymptote" in capsys.readouterr().err


def test_threshold_without_violation(trivial_catalog, capsys):
    args = ["--no-ledger", "threshold", "--ineq", f"catalog:{trivial_catalog}", "--restarts", "2"]
    assert main(args) == 3


def test_threshold_tolerance_out_of_range(capsys):
    assert main(["--no-ledger", "threshold", "--ineq", "mabk", "--tol", "0.5"]) == 2


def test_unknown_inequality_is_malformed(capsys):
    assert main(["--no-ledger", "threshold", "--ineq", "nope"]) == 1


def test_runs_are_recorded(capsys):
    assert main(["construct", "--preset", "pi5"]) == 0
    run_id = json.loads(capsys.readouterr().out)["run_id"]
    db = SessionLocal()
    try:
        assert runs_repo.get_run(db, run_id).command == "construct"
    finally:
        db.close()
