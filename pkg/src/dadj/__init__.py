"""Adjoint systems, symmetries and conservation laws of difference equations."""

from .errors import DadjError
from .expr import Expr, normalize, diff, substitute, evaluate, is_zero
from .parser import parse_expr, parse_problem, render
from .kernel import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "DadjError", "Expr", "diff", "evaluate", "is_zero", "normalize",
           "parse_expr", "parse_problem", "render", "substitute"]
