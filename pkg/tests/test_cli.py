import json
import os
import subprocess
import sys

import pytest

from conftest import problem_path
from dadj import cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out


def run_json(argv, capsys):
    code, out = run(argv, capsys)
    return code, json.loads(out.out)


def test_adjoint_report_schema(capsys):
    code, rep = run_json(["adjoint", problem_path("ex32")], capsys)
    assert code == 0 and rep["exit_code"] == 0 and rep["status"] == "ok"
    assert rep["schema_version"] == cli.SCHEMA_VERSION
    assert len(rep["input"]["sha256"]) == 64
    assert rep["results"]["lagrangian"]


def test_backward_file_warns(capsys):
    code, rep = run_json(["adjoint", problem_path("ex32_backward")], capsys)
    assert code == 0 and rep["warnings"]
    assert rep["results"]["normalizing_shifts"] == [[1]]


def test_reports_are_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        cli.main(["noether", problem_path("hydon"), "--sym", "Q1", "--steps", "5",
                  "--orbits", "2", "--out", str(out)])
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_noether_with_transfer(capsys):
    code, rep = run_json(["noether", problem_path("ex41"), "--sym", "Q2", "--subst", "quasi",
                          "--steps", "8", "--orbits", "2"], capsys)
    assert code == 0
    t = rep["results"]["symmetries"][0]["transfer"]
    assert t["equivalent_to"] == {"P2simple": 1} and not t["trivial"]


def test_noether_rejected_candidate_continues(capsys):
    code, rep = run_json(["noether", problem_path("ex41"), "--sym", "NotSym", "Q1",
                          "--steps", "5", "--orbits", "1"], capsys)
    verdicts = [s["verdict"] for s in rep["results"]["symmetries"]]
    assert code == 2 and verdicts == ["not-symmetric", "symmetric"]


def test_selfadjoint(capsys):
    code, rep = run_json(["selfadjoint", problem_path("o2de_generic")], capsys)
    assert code == 0 and rep["results"]["classification"] == "none-found"
    assert rep["results"]["o2de_condition"] is False


def test_apply_deduplicates(capsys):
    code, rep = run_json(["apply", problem_path("wave"), "--law", "cl43", "--sym", "X10", "Xt10",
                          "--repeat", "2", "--steps", "4", "--orbits", "1"], capsys)
    assert code == 0
    labels = {d["label"]: d["equivalent_to"] for d in rep["results"]["derived"]}
    assert labels["Xt10(X10(cl43))"] is None
    assert labels["X10(Xt10(cl43))"] == "Xt10(X10(cl43))"


def test_apply_rejects_non_symmetry(capsys):
    code, rep = run_json(["apply", problem_path("ex41"), "--law", "P2simple", "--sym", "NotSym"],
                         capsys)
    assert code == 2 and rep["results"]["rejected"] == "NotSym"


def test_verify_inline_and_file_laws(capsys):
    code, rep = run_json(["verify", problem_path("ex41"), "--law", "P2simple"], capsys)
    assert code == 0 and rep["results"]["verification"]["passed"]
    code, rep = run_json(["verify", problem_path("ex41"), "--law", "Q2/quasi", "--steps", "6"],
                         capsys)
    assert code == 0 and rep["results"]["system"] == "original"


def test_verify_failing_law_exits_2(tmp_path, capsys):
    f = tmp_path / "bad.dadj"
    f.write_text("[system]\nequation = u[2]*u[0] - u[1]^2\n[laws]\nbad = u[0]/u[-1]^2\n")
    code, rep = run_json(["verify", str(f), "--law", "bad", "--steps", "5", "--orbits", "2"], capsys)
    assert code == 2 and not rep["results"]["verification"]["passed"]


def test_parse_error_exit_1(tmp_path, capsys):
    f = tmp_path / "broken.dadj"
    f.write_text("[system]\nequation = u[2] - \n")
    code, out = run(["adjoint", str(f)], capsys)
    assert code == 1
    assert "line 2, column" in out.err
    assert json.loads(out.out)["status"] == "error"


def test_unknown_names_exit_1(capsys):
    code, _ = run(["noether", problem_path("ex41"), "--sym", "Nope"], capsys)
    assert code == 1
    code, _ = run(["verify", problem_path("ex41"), "--law", "Nope"], capsys)
    assert code == 1


def test_missing_file(capsys):
    code, out = run(["adjoint", "/nonexistent.dadj"], capsys)
    assert code == 1 and "dadj:" in out.err


def test_text_format_and_color(capsys, monkeypatch):
    monkeypatch.setenv("DADJ_COLOR", "never")
    code, out = run(["adjoint", problem_path("ex32"), "--format", "text"], capsys)
    assert out.out.startswith("dadj adjoint: ok") and "\033[" not in out.out
    monkeypatch.setenv("DADJ_COLOR", "always")
    _, colored = run(["adjoint", problem_path("ex32"), "--format", "text"], capsys)
    assert "\033[32m" in colored.out


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "dadj.cli", "adjoint", problem_path("ex32")],
                         capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["command"] == "adjoint"
