"""Determinism analysis and the deterministic fast path.

Functions that can never introduce non-determinism are compiled into plain
Python closures working on plain values: no branch ids, no task result maps,
no choice trees. The engine hands whole calls to this world when every
argument is already a plain value, and marks the results with ``DetV`` so that
later consumers can stay on the fast path.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

from .deep import deep_call
from .errors import InternalDetError
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
    children,
)
from .runtime import Const
from .values import ConV, DetV, LitV, PCon

FAST_CALL_CAP = 2_000_000
ARITH = ("add", "sub", "mul", "eqInt", "leqInt")


class Det(enum.Enum):
    DETERMINISTIC = "deterministic"
    NONDETERMINISTIC = "nondeterministic"


@dataclass(frozen=True)
class DetInfo:
    flags: dict[str, Det]
    fast_safe: dict[str, bool]

    def is_det(self, name: str) -> bool:
        return self.flags.get(name) is Det.DETERMINISTIC

    def explain(self) -> list[str]:
        lines = []
        for name in sorted(self.flags):
            tag = self.flags[name].value
            if self.fast_safe.get(name):
                tag += ", fast path"
            lines.append(f"{name}: {tag}")
        return lines


def _spine(e: Expr) -> tuple[Expr, list[Expr]]:
    args = []
    while type(e) is App:
        args.append(e.arg)
        e = e.fun
    args.reverse()
    return e, args


def _scan(body: Expr, arity: dict[str, int]) -> tuple[bool, set[str], bool]:
    """Return (directly non-deterministic, callees, first order)."""
    nondet = False
    first_order = True
    callees: set[str] = set()
    stack = [body]
    while stack:
        x = stack.pop()
        t = type(x)
        if t is Prim and x.op == "allValues":
            # encapsulation seals non-determinism, but the fast path cannot run it
            first_order = False
            continue
        if t is Choice or t is Failed or t is Free or (t is Prim and x.op == "unify"):
            nondet = True
        elif t is Lambda:
            first_order = False
        elif t is App:
            head, args = _spine(x)
            if type(head) is not FuncRef or arity.get(head.name, -1) != len(args):
                first_order = False
            if type(head) is FuncRef:
                callees.add(head.name)
            else:
                stack.append(head)
            stack.extend(args)
            continue
        elif t is FuncRef:
            callees.add(x.name)
            if arity.get(x.name, -1) != 0:
                first_order = False
        stack.extend(children(x))
    return nondet, callees, first_order


def analyze_determinism(p: KernelProgram) -> DetInfo:
    """Least fixed point of the non-determinism transfer function."""
    arity = {f.name: len(f.params) for f in p.functions}
    facts = {f.name: _scan(f.body, arity) for f in p.functions}
    nondet = {n for n, (d, _, _) in facts.items() if d}
    changed = True
    while changed:
        changed = False
        for n, (_, callees, _) in facts.items():
            if n not in nondet and any(c in nondet or c not in facts for c in callees):
                nondet.add(n)
                changed = True
    unsafe = {n for n, (_, _, fo) in facts.items() if n in nondet or not fo}
    changed = True
    while changed:
        changed = False
        for n, (_, callees, _) in facts.items():
            if n not in unsafe and any(c in unsafe for c in callees):
                unsafe.add(n)
                changed = True
    flags = {n: Det.NONDETERMINISTIC if n in nondet else Det.DETERMINISTIC for n in facts}
    return DetInfo(flags, {n: n not in unsafe for n in facts})


def fast_closed(e: Expr, info: DetInfo, arity: dict[str, int]) -> bool:
    """Can ``e`` run entirely on the fast path given plain local variables?"""
    stack = [e]
    while stack:
        x = stack.pop()
        t = type(x)
        if t is Var or t is Lit:
            continue
        if t is ConApp:
            stack.extend(x.args)
        elif t is Prim and x.op in ARITH:
            stack.extend(x.args)
        elif t is App or t is FuncRef:
            head, args = _spine(x)
            if type(head) is not FuncRef or not info.fast_safe.get(head.name):
                return False
            if arity[head.name] != len(args):
                return False
            stack.extend(args)
        else:
            return False
    return True


# -- plain values ------------------------------------------------------------


class FastAbort(Exception):
    """The fast path gave up; the engine takes over."""


class PThunk:
    """Effect-free suspended computation inside the fast path."""

    __slots__ = ("fn", "fr", "val")

    def __init__(self, fn, fr):
        self.fn = fn
        self.fr = fr
        self.val = None

    def force(self):
        fn = self.fn
        if fn is None:
            return self.val
        self.fn = _blackhole
        v = fn(self.fr)
        self.val = v
        self.fn = None
        self.fr = None
        return v


def _blackhole(fr):
    raise FastAbort("value depends on itself")


def force(v):
    return v.force() if type(v) is PThunk else v


def deep_force(v):
    """Force every thunk reachable from ``v`` (iteratively, once per cell)."""
    v = force(v)
    if type(v) is not PCon:
        return v
    seen = {id(v)}
    stack = [v]
    while stack:
        x = stack.pop()
        if not x.fields:
            continue
        fs = tuple(f.force() if type(f) is PThunk else f for f in x.fields)
        x.fields = fs
        for f in fs:
            if type(f) is PCon and f.fields and id(f) not in seen:
                seen.add(id(f))
                stack.append(f)
    return v


def lift_det_value(v):
    """Plain value to head value; constructors are wrapped, not converted."""
    if type(v) is int:
        return LitV(v)
    return DetV(v)


def unwrap_det(v: DetV) -> ConV:
    """Convert one constructor layer; fields stay lazily wrapped."""
    p = v.plain
    return ConV(p.name, tuple(Const(lift_det_value(f)) for f in p.fields))


def to_plain(v) -> Optional[object]:
    """Normalized head value to plain value; ``None`` if it has free variables or functions."""

    def conv(x):
        t = type(x)
        if t is LitV:
            return x.n
        if t is DetV:
            return x.plain
        return None

    tv = type(v)
    if tv is not ConV:
        return conv(v)
    # iterative post-order over constructor cells
    root = PCon(v.name, ())
    stack = [(v, root)]
    while stack:
        src, dst = stack.pop()
        out = []
        for h in src.fields:
            x = h.value if type(h) is Const else None
            if x is None:
                return None
            if type(x) is ConV:
                cell = PCon(x.name, ())
                stack.append((x, cell))
                out.append(cell)
            else:
                c = conv(x)
                if c is None:
                    return None
                out.append(c)
        dst.fields = tuple(out)
    return root


# -- compiler ----------------------------------------------------------------

_TRUE = PCon("True")
_FALSE = PCon("False")


def _strict_var(i):
    def run(fr):
        v = fr[i]
        return v.force() if type(v) is PThunk else v

    return run


def _int(v):
    if type(v) is not int:
        raise FastAbort("arithmetic on a non-integer")
    return v


class FastPath:
    """Lazily compiled plain-value copies of fast-path-safe functions."""

    def __init__(self, program: KernelProgram, info: DetInfo):
        self.funcs = {f.name: f for f in program.functions}
        self.info = info
        self.cells: dict[str, list] = {}
        self.counter = [0]
        self.cap = FAST_CALL_CAP
        self.nullary: dict[str, PCon] = {}

    # public -------------------------------------------------------------
    def function(self, name: str) -> list:
        """Cell holding the compiled function (filled on first use)."""
        cell = self.cells.get(name)
        if cell is None:
            if not self.info.fast_safe.get(name):
                raise InternalDetError(f"{name} is not safe for the fast path")
            cell = self.cells[name] = [None]
            cell[0] = self._compile_function(self.funcs[name])
        return cell

    def compile_site(self, expr: Expr, var_names: tuple[str, ...]) -> Callable:
        scope = {v: i for i, v in enumerate(var_names)}
        ctx = _Ctx(len(var_names))
        body = self._strict(expr, scope, ctx)
        pad = [None] * (ctx.n - len(var_names))

        def site(*args):
            fr = list(args)
            fr.extend(pad)
            return body(fr)

        return site

    def run(self, fn: Callable, args) -> object:
        """Evaluate to a fully forced plain value or raise FastAbort."""
        self.counter[0] = 0
        return deep_call(self._run, fn, args)

    def _run(self, fn, args):
        try:
            return deep_force(fn(*args))
        except FastAbort:
            raise
        except (RecursionError, TypeError, AttributeError, KeyError, IndexError) as exc:
            raise FastAbort(str(exc)) from None

    # compilation ----------------------------------------------------------
    def _compile_function(self, f) -> Callable:
        ctx = _Ctx(len(f.params))
        scope = {p: i for i, p in enumerate(f.params)}
        body = self._strict(f.body, scope, ctx)
        pad = [None] * (ctx.n - len(f.params))
        counter, cap = self.counter, self.cap

        def fn(*args):
            c = counter[0] + 1
            counter[0] = c
            if c > cap:
                raise FastAbort("fast path step cap reached")
            fr = list(args)
            if pad:
                fr.extend(pad)
            return body(fr)

        fn.__name__ = f"fast_{f.name}"
        return fn

    def _con(self, name: str) -> PCon:
        c = self.nullary.get(name)
        if c is None:
            c = self.nullary[name] = _TRUE if name == "True" else _FALSE if name == "False" else PCon(name)
        return c

    def _lazy(self, e: Expr, scope: dict, ctx: "_Ctx") -> Callable:
        t = type(e)
        if t is Var:
            i = scope[e.name]
            return lambda fr: fr[i]
        if t is Lit:
            n = e.value
            return lambda fr: n
        if t is ConApp:
            return self._construct(e, scope, ctx)
        s = self._strict(e, scope, ctx)
        return lambda fr: PThunk(s, fr)

    def _construct(self, e: ConApp, scope, ctx) -> Callable:
        name = e.con
        if not e.args:
            c = self._con(name)
            return lambda fr: c
        fs = [self._lazy(a, scope, ctx) for a in e.args]
        if len(fs) == 1:
            f0 = fs[0]
            return lambda fr: PCon(name, (f0(fr),))
        if len(fs) == 2:
            f0, f1 = fs
            return lambda fr: PCon(name, (f0(fr), f1(fr)))
        return lambda fr: PCon(name, tuple(f(fr) for f in fs))

    def _strict(self, e: Expr, scope: dict, ctx: "_Ctx") -> Callable:
        t = type(e)
        if t is Var:
            return _strict_var(scope[e.name])
        if t is Lit:
            n = e.value
            return lambda fr: n
        if t is ConApp:
            return self._construct(e, scope, ctx)
        if t is Prim and e.op in ARITH:
            l = self._strict(e.args[0], scope, ctx)
            r = self._strict(e.args[1], scope, ctx)
            op = e.op
            if op == "add":
                return lambda fr: _int(l(fr)) + _int(r(fr))
            if op == "sub":
                return lambda fr: _int(l(fr)) - _int(r(fr))
            if op == "mul":
                return lambda fr: _int(l(fr)) * _int(r(fr))
            if op == "eqInt":
                return lambda fr: _TRUE if _int(l(fr)) == _int(r(fr)) else _FALSE
            return lambda fr: _TRUE if _int(l(fr)) <= _int(r(fr)) else _FALSE
        if t is App or t is FuncRef:
            head, args = _spine(e)
            if type(head) is not FuncRef:
                raise InternalDetError("higher-order application on the fast path")
            cell = self.function(head.name)
            if len(args) != len(self.funcs[head.name].params):
                raise InternalDetError(f"unsaturated call of {head.name} on the fast path")
            lz = [self._lazy(a, scope, ctx) for a in args]
            if not lz:
                return lambda fr: cell[0]()
            if len(lz) == 1:
                a0 = lz[0]
                return lambda fr: cell[0](a0(fr))
            if len(lz) == 2:
                a0, a1 = lz
                return lambda fr: cell[0](a0(fr), a1(fr))
            return lambda fr: cell[0](*[a(fr) for a in lz])
        if t is Let:
            i = ctx.alloc()
            inner = dict(scope)
            inner[e.binder] = i
            bound = self._strict(e.bound, inner, ctx)
            body = self._strict(e.body, inner, ctx)

            def let(fr):
                fr[i] = PThunk(bound, fr)
                return body(fr)

            return let
        if t is Case:
            return self._case(e, scope, ctx)
        raise InternalDetError(f"{t.__name__} reached on the fast path")

    def _case(self, e: Case, scope, ctx) -> Callable:
        scrut = self._strict(e.scrutinee, scope, ctx)
        cons: dict[str, tuple] = {}
        lits: dict[int, Callable] = {}
        default = None
        for a in e.branches:
            pat = a.pattern
            inner = dict(scope)
            if isinstance(pat, ConPat):
                idxs = []
                for v in pat.vars:
                    i = ctx.alloc()
                    inner[v] = i
                    idxs.append(i)
                cons[pat.con] = (tuple(idxs), self._strict(a.body, inner, ctx))
            elif isinstance(pat, LitPat):
                lits[pat.value] = self._strict(a.body, scope, ctx)
            elif isinstance(pat, DefaultPat):
                slot = None
                if pat.var is not None:
                    slot = ctx.alloc()
                    inner[pat.var] = slot
                default = (slot, self._strict(a.body, inner, ctx))

        def case(fr):
            v = scrut(fr)
            if type(v) is PCon:
                alt = cons.get(v.name)
                if alt is not None:
                    idxs, body = alt
                    for i, f in zip(idxs, v.fields):
                        fr[i] = f
                    return body(fr)
            elif lits:
                body = lits.get(v)
                if body is not None:
                    return body(fr)
            if default is None:
                raise FastAbort("no matching branch")
            slot, body = default
            if slot is not None:
                fr[slot] = v
            return body(fr)

        return case


class _Ctx:
    __slots__ = ("n",)

    def __init__(self, n: int):
        self.n = n

    def alloc(self) -> int:
        i = self.n
        self.n += 1
        return i


def eval_deterministic(fp: FastPath, name: str, args: list) -> object:
    """Run a fast-path-safe function on plain arguments."""
    return fp.run(fp.function(name)[0], args)


def is_plain(v) -> bool:
    """True if ``v`` is a fully forced plain value."""
    stack = [v]
    while stack:
        x = stack.pop()
        if type(x) is int:
            continue
        if type(x) is not PCon:
            return False
        stack.extend(x.fields)
    return True


__all__ = [
    "Det",
    "DetInfo",
    "FastAbort",
    "FastPath",
    "PThunk",
    "analyze_determinism",
    "deep_force",
    "eval_deterministic",
    "fast_closed",
    "is_plain",
    "lift_det_value",
    "to_plain",
    "unwrap_det",
]
