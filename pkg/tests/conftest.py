import os
import sys
from functools import lru_cache

import pytest

from dadj import lattice as LC
from dadj.parser import parse_expr, parse_problem

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
PROBLEMS = os.path.join(ROOT, "problems")


def problem_path(name):
    return os.path.join(PROBLEMS, f"{name}.dadj")


@lru_cache(maxsize=None)
def load(name):
    with open(problem_path(name)) as fh:
        problem = parse_problem(fh.read())
    return problem, LC.DifferenceSystem.from_problem(problem)


def expr(text, name):
    """Parse ``text`` against the header of problem ``name``."""
    return parse_expr(text, load(name)[0])


@pytest.fixture
def corpus():
    return load


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
    for check, (ok, detail) in sorted(mod.RESULTS.items()):
        if not ok:
            terminalreporter.write_line(f"  red {check}: {detail}")
