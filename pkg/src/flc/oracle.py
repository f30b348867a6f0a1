"""Reference semantics by eager enumeration.

Every argument and let binding is evaluated to the full list of its values
first; each value is then substituted separately. Sharing therefore happens
by value, which is call-time choice on terminating programs. This evaluator
shares no code with the engine apart from the AST and the renderer.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import product
from typing import Optional

from .deep import deep_call
from .errors import OracleTimeout, OracleUnsupported
from .kernel import (
    App,
    Case,
    Choice,
    ConApp,
    ConPat,
    DefaultPat,
    Expr,
    Failed,
    Free,
    FuncRef,
    KernelProgram,
    Lambda,
    Let,
    Lit,
    LitPat,
    Prim,
    Var,
    free_vars,
)
from .render import render
from .values import PCon

DEFAULT_MAX_STEPS = 10**5
DEFAULT_MAX_WIDTH = 10**5

_TRUE = PCon("True")
_FALSE = PCon("False")


@dataclass(frozen=True)
class Closure:
    param: str
    body: Expr
    env: tuple  # sorted (name, value) pairs, so closures hash by content

    def lookup(self) -> dict:
        return dict(self.env)


@dataclass(frozen=True)
class Partial:
    """A top-level function applied to fewer arguments than it takes."""

    name: str
    args: tuple


class Oracle:
    def __init__(self, program: KernelProgram, max_steps: int = DEFAULT_MAX_STEPS, max_width: int = DEFAULT_MAX_WIDTH):
        self.funcs = {f.name: f for f in program.functions}
        self.max_steps = max_steps
        self.max_width = max_width
        self.steps = 0
        self.calls: dict = {}

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise OracleTimeout(f"oracle exceeded {self.max_steps} steps")

    def widen(self, values: list) -> list:
        if len(values) > self.max_width:
            raise OracleTimeout(f"oracle exceeded width {self.max_width}")
        return values

    # -- evaluation -----------------------------------------------------------
    def eval(self, e: Expr, env: dict) -> list:
        self.tick()
        t = type(e)
        if t is Var:
            return [env[e.name]]
        if t is Lit:
            return [e.value]
        if t is FuncRef:
            f = self.funcs[e.name]
            if not f.params:
                return self.call(e.name, ())
            return [Partial(e.name, ())]
        if t is ConApp:
            parts = [self.eval(a, env) for a in e.args]
            return self.widen([PCon(e.con, tuple(c)) for c in product(*parts)])
        if t is App:
            fs = self.eval(e.fun, env)
            xs = self.eval(e.arg, env)
            out = []
            for f in fs:
                for x in xs:
                    out.extend(self.apply(f, x))
            return self.widen(out)
        if t is Lambda:
            return [Closure(e.param, e.body, tuple(sorted(env.items(), key=lambda kv: kv[0])))]
        if t is Let:
            if e.binder in free_vars(e.bound):
                raise OracleUnsupported("recursive let binding")
            out = []
            for v in self.eval(e.bound, env):
                inner = dict(env)
                inner[e.binder] = v
                out.extend(self.eval(e.body, inner))
            return self.widen(out)
        if t is Case:
            out = []
            for v in self.eval(e.scrutinee, env):
                out.extend(self.match(e, v, env))
            return self.widen(out)
        if t is Choice:
            return self.widen(self.eval(e.left, env) + self.eval(e.right, env))
        if t is Failed:
            return []
        if t is Free:
            raise OracleUnsupported("free variables are outside the oracle's scope")
        if t is Prim:
            return self.prim(e, env)
        raise TypeError(f"not an expression: {e!r}")

    def match(self, c: Case, v, env: dict) -> list:
        for a in c.branches:
            pat = a.pattern
            if isinstance(pat, ConPat):
                if type(v) is PCon and v.name == pat.con:
                    inner = dict(env)
                    inner.update(zip(pat.vars, v.fields))
                    return self.eval(a.body, inner)
            elif isinstance(pat, LitPat):
                if type(v) is int and v == pat.value:
                    return self.eval(a.body, env)
            elif isinstance(pat, DefaultPat):
                inner = env
                if pat.var is not None:
                    inner = dict(env)
                    inner[pat.var] = v
                return self.eval(a.body, inner)
        return []

    def apply(self, f, x) -> list:
        if type(f) is Closure:
            env = f.lookup()
            env[f.param] = x
            return self.eval(f.body, env)
        if type(f) is Partial:
            args = f.args + (x,)
            if len(args) == len(self.funcs[f.name].params):
                return self.call(f.name, args)
            return [Partial(f.name, args)]
        raise OracleUnsupported(f"application of a non-function {f!r}")

    def call(self, name: str, args: tuple) -> list:
        key = (name, args)
        try:
            hit = self.calls.get(key)
        except TypeError:
            hit, key = None, None
        if hit is not None:
            return hit
        f = self.funcs[name]
        out = self.eval(f.body, dict(zip(f.params, args)))
        if key is not None:
            self.calls[key] = out
        return out

    def prim(self, e: Prim, env: dict) -> list:
        op = e.op
        if op == "unify":
            raise OracleUnsupported("unification is outside the oracle's scope")
        if op == "allValues":
            values = self.eval(e.args[0], env)
            out = PCon("Nil")
            for v in reversed(values):
                out = PCon("Cons", (v, out))
            return [out]
        xs = self.eval(e.args[0], env)
        ys = self.eval(e.args[1], env)
        out = []
        for x in xs:
            for y in ys:
                if type(x) is not int or type(y) is not int:
                    raise OracleUnsupported(f"{op} on non-integers")
                if op == "add":
                    out.append(x + y)
                elif op == "sub":
                    out.append(x - y)
                elif op == "mul":
                    out.append(x * y)
                elif op == "eqInt":
                    out.append(_TRUE if x == y else _FALSE)
                else:
                    out.append(_TRUE if x <= y else _FALSE)
        return self.widen(out)


def oracle_values(p: KernelProgram, expr: Optional[Expr] = None, **caps) -> list:
    """All values of ``expr`` (default: main), in enumeration order."""
    o = Oracle(p, **caps)
    target = expr if expr is not None else p.main
    if target is None:
        raise OracleUnsupported("program has no main")
    try:
        return deep_call(o.eval, target, {})
    except RecursionError:
        raise OracleTimeout("oracle recursion too deep") from None


def oracle_enumerate(p: KernelProgram, **caps) -> Counter:
    """Multiset of rendered values of main."""
    return Counter(render_oracle(v) for v in oracle_values(p, **caps))


def render_oracle(v) -> str:
    if type(v) in (Closure, Partial):
        return "<function>"
    return render(v)
