"""Kernel language AST.

Nodes are frozen dataclasses. Source positions ride along in ``pos`` but are
excluded from equality so that transformed programs compare structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

Pos = Optional[tuple[int, int]]

PRIM_OPS = frozenset({"add", "sub", "mul", "eqInt", "leqInt", "unify", "allValues"})
PRIM_ARITY = {"add": 2, "sub": 2, "mul": 2, "eqInt": 2, "leqInt": 2, "unify": 2, "allValues": 1}


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class FuncRef:
    name: str
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Lit:
    value: int
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class ConApp:
    con: str
    args: tuple["Expr", ...] = ()
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class App:
    fun: "Expr"
    arg: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Lambda:
    param: str
    body: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Let:
    """Recursive single binding: ``binder`` is in scope inside ``bound``."""

    binder: str
    bound: "Expr"
    body: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class ConPat:
    con: str
    vars: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class LitPat:
    value: int


@dataclass(frozen=True, slots=True)
class DefaultPat:
    """Catch-all branch; ``var`` (if any) is bound to the scrutinee."""

    var: Optional[str] = None


Pattern = Union[ConPat, LitPat, DefaultPat]


@dataclass(frozen=True, slots=True)
class Alt:
    pattern: Pattern
    body: "Expr"


@dataclass(frozen=True, slots=True)
class Case:
    scrutinee: "Expr"
    branches: tuple[Alt, ...]
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Choice:
    left: "Expr"
    right: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Failed:
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Free:
    binder: str
    body: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Prim:
    op: str
    args: tuple["Expr", ...]
    pos: Pos = field(default=None, compare=False, repr=False)


Expr = Union[Var, FuncRef, Lit, ConApp, App, Lambda, Let, Case, Choice, Failed, Free, Prim]


@dataclass(frozen=True, slots=True)
class DataDecl:
    name: str
    type_params: tuple[str, ...]
    constructors: tuple[tuple[str, int], ...]
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class FuncDecl:
    name: str
    params: tuple[str, ...]
    body: Expr
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class KernelProgram:
    data_decls: tuple[DataDecl, ...] = ()
    functions: tuple[FuncDecl, ...] = ()
    main: Optional[Expr] = None

    def function(self, name: str) -> FuncDecl:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def constructor_table(self) -> dict[str, tuple[str, int]]:
        """Map constructor name to (type name, arity)."""
        return {c: (d.name, n) for d in self.data_decls for c, n in d.constructors}

    def type_constructors(self) -> dict[str, tuple[tuple[str, int], ...]]:
        return {d.name: d.constructors for d in self.data_decls}


def children(e: Expr) -> list[Expr]:
    """Immediate subexpressions, left to right."""
    t = type(e)
    if t is App:
        return [e.fun, e.arg]
    if t is Lambda or t is Free:
        return [e.body]
    if t is Let:
        return [e.bound, e.body]
    if t is Case:
        return [e.scrutinee] + [a.body for a in e.branches]
    if t is Choice:
        return [e.left, e.right]
    if t is ConApp or t is Prim:
        return list(e.args)
    return []


def walk(e: Expr):
    """Pre-order traversal without recursion."""
    stack = [e]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(reversed(children(x)))


def free_vars(e: Expr) -> list[str]:
    """Free local variables of ``e`` in first-occurrence order."""
    out: dict[str, None] = {}

    def go(x: Expr, bound: frozenset[str]) -> None:
        t = type(x)
        if t is Var:
            if x.name not in bound:
                out.setdefault(x.name)
        elif t is Lambda or t is Free:
            go(x.body, bound | {x.param if t is Lambda else x.binder})
        elif t is Let:
            inner = bound | {x.binder}
            go(x.bound, inner)
            go(x.body, inner)
        elif t is Case:
            go(x.scrutinee, bound)
            for a in x.branches:
                go(a.body, bound | set(pattern_vars(a.pattern)))
        else:
            for c in children(x):
                go(c, bound)

    go(e, frozenset())
    return list(out)


def pattern_vars(p: Pattern) -> tuple[str, ...]:
    if isinstance(p, ConPat):
        return p.vars
    if isinstance(p, DefaultPat) and p.var is not None:
        return (p.var,)
    return ()


def lambdas(params: tuple[str, ...], body: Expr) -> Expr:
    for p in reversed(params):
        body = Lambda(p, body)
    return body


def map_children(e: Expr, f) -> Expr:
    """Rebuild ``e`` with ``f`` applied to each immediate subexpression."""
    t = type(e)
    if t is App:
        return App(f(e.fun), f(e.arg), e.pos)
    if t is Lambda:
        return Lambda(e.param, f(e.body), e.pos)
    if t is Free:
        return Free(e.binder, f(e.body), e.pos)
    if t is Let:
        return Let(e.binder, f(e.bound), f(e.body), e.pos)
    if t is Case:
        return Case(f(e.scrutinee), tuple(Alt(a.pattern, f(a.body)) for a in e.branches), e.pos)
    if t is Choice:
        return Choice(f(e.left), f(e.right), e.pos)
    if t is ConApp:
        return ConApp(e.con, tuple(f(a) for a in e.args), e.pos)
    if t is Prim:
        return Prim(e.op, tuple(f(a) for a in e.args), e.pos)
    return e
