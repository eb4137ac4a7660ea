"""Structured reports compared against checked-in golden files.

Regenerate with ``DADJ_REGEN_GOLDEN=1 pytest tests/test_golden.py``.
"""

import json
import os

import pytest

from conftest import ROOT, problem_path
from dadj import cli

GOLDEN = os.path.join(ROOT, "tests", "golden")

CASES = [
    ("adjoint", "ex32", []),
    ("adjoint", "wave", []),
    ("adjoint", "h1", []),
    ("selfadjoint", "ex41", []),
    ("selfadjoint", "o2de_weak", []),
    ("noether", "ex42", ["--sym", "X", "--subst", "const", "--steps", "8", "--orbits", "2"]),
]


@pytest.mark.parametrize("command,name,extra", CASES, ids=[f"{c}-{n}" for c, n, _ in CASES])
def test_report_matches_golden(command, name, extra, tmp_path, capsys):
    out = tmp_path / "report.json"
    cli.main([command, problem_path(name), "--out", str(out)] + extra)
    capsys.readouterr()
    got = json.loads(out.read_text())
    path = os.path.join(GOLDEN, f"{command}-{name}.json")
    if os.environ.get("DADJ_REGEN_GOLDEN") or not os.path.exists(path):
        os.makedirs(GOLDEN, exist_ok=True)
        with open(path, "w") as fh:
            json.dump(got, fh, indent=2, sort_keys=True)
            fh.write("\n")
    with open(path) as fh:
        assert got == json.load(fh)
