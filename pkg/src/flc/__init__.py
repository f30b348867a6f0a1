"""A functional-logic kernel interpreter with memoized pull-tabbing."""

from .engine import Computation, Runtime
from .errors import FlcError, StaticError
from .oracle import oracle_enumerate, oracle_values
from .parser import parse, parse_expr
from .render import render
from .search import BFS, DFS, FAIR, IDS, Budget, Strategy, enumerate_tree
from .transform import flatten, load, to_uniform, validate

__version__ = "0.1.0"

__all__ = [
    "BFS",
    "Budget",
    "Computation",
    "DFS",
    "FAIR",
    "FlcError",
    "IDS",
    "Runtime",
    "StaticError",
    "Strategy",
    "enumerate_tree",
    "flatten",
    "load",
    "oracle_enumerate",
    "oracle_values",
    "parse",
    "parse_expr",
    "render",
    "to_uniform",
    "validate",
]
