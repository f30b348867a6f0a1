"""Program-level passes: validation, pattern completion and uniform form."""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

from .errors import Diagnostic, MixedTypeBranches, StaticError, UnknownConstructor
from .kernel import (
    PRIM_ARITY,
    Alt,
    App,
    Case,
    ConApp,
    ConPat,
    DefaultPat,
    Expr,
    Failed,
    Free,
    FuncDecl,
    FuncRef,
    KernelProgram,
    Lambda,
    Let,
    LitPat,
    Prim,
    Var,
    free_vars,
    map_children,
    pattern_vars,
    walk,
)
from .parser import parse


# -- flatten -----------------------------------------------------------------


class _Flattener:
    def __init__(self, p: KernelProgram):
        self.ctors = p.constructor_table()
        self.types = p.type_constructors()
        self.fresh = 0

    def gensym(self) -> str:
        self.fresh += 1
        return f"%w{self.fresh}"

    def __call__(self, e: Expr) -> Expr:
        e = map_children(e, self)
        if type(e) is Case:
            return self.complete(e)
        return e

    def complete(self, c: Case) -> Case:
        reachable: list[Alt] = []
        for a in c.branches:
            reachable.append(a)
            if isinstance(a.pattern, DefaultPat):
                break
        con_alts = [a for a in reachable if isinstance(a.pattern, ConPat)]
        lit_alts = [a for a in reachable if isinstance(a.pattern, LitPat)]
        default = reachable[-1] if isinstance(reachable[-1].pattern, DefaultPat) else None
        if con_alts and lit_alts:
            raise MixedTypeBranches("case mixes constructor and literal patterns", c.pos)
        if lit_alts:
            seen: set[int] = set()
            kept = []
            for a in lit_alts:
                if a.pattern.value not in seen:
                    seen.add(a.pattern.value)
                    kept.append(a)
            return Case(c.scrutinee, tuple(kept) + ((default,) if default else ()), c.pos)
        if not con_alts:
            return Case(c.scrutinee, (default,), c.pos)
        type_name = None
        for a in con_alts:
            info = self.ctors.get(a.pattern.con)
            if info is None:
                raise UnknownConstructor(f"unknown constructor {a.pattern.con}", c.pos)
            if type_name is not None and info[0] != type_name:
                raise MixedTypeBranches(
                    f"case branches mix constructors of {type_name} and {info[0]}", c.pos
                )
            type_name = info[0]
        by_con: dict[str, Alt] = {}
        for a in con_alts:
            by_con.setdefault(a.pattern.con, a)
        out = []
        for con, arity in self.types[type_name]:
            if con in by_con:
                out.append(by_con[con])
                continue
            names = tuple(self.gensym() for _ in range(arity))
            if default is None:
                body: Expr = Failed()
            elif default.pattern.var is None:
                body = default.body
            else:
                rebuilt = ConApp(con, tuple(Var(n) for n in names))
                body = Let(default.pattern.var, rebuilt, default.body)
            out.append(Alt(ConPat(con, names), body))
        return Case(c.scrutinee, tuple(out), c.pos)


def flatten(p: KernelProgram) -> KernelProgram:
    """Complete every case so it has one branch per constructor of its type."""
    f = _Flattener(p)
    funcs = tuple(replace(fn, body=f(fn.body)) for fn in p.functions)
    main = f(p.main) if p.main is not None else None
    return KernelProgram(p.data_decls, funcs, main)


# -- uniform form ------------------------------------------------------------


class _Uniformer:
    def __init__(self, p: KernelProgram):
        self.taken = {f.name for f in p.functions} | {"main"}
        self.out: list[FuncDecl] = []

    def fresh_name(self, owner: str) -> str:
        k = 1
        while f"{owner}%case{k}" in self.taken:
            k += 1
        name = f"{owner}%case{k}"
        self.taken.add(name)
        return name

    def function(self, owner: str, body: Expr) -> Expr:
        if type(body) is Case:
            scrut = self.lift(owner, body.scrutinee)
            alts = tuple(Alt(a.pattern, self.lift(owner, a.body)) for a in body.branches)
            return Case(scrut, alts, body.pos)
        return self.lift(owner, body)

    def lift(self, owner: str, e: Expr) -> Expr:
        if type(e) is Case:
            params = tuple(free_vars(e))
            name = self.fresh_name(owner)
            fn = FuncDecl(name, params, e, e.pos)
            self.out.append(fn)
            idx = len(self.out) - 1
            self.out[idx] = replace(fn, body=self.function(name, e))
            call: Expr = FuncRef(name, e.pos)
            for v in params:
                call = App(call, Var(v), e.pos)
            return call
        return map_children(e, lambda c: self.lift(owner, c))


def to_uniform(p: KernelProgram) -> KernelProgram:
    """Lift every non-root case into a fresh function of its free variables."""
    u = _Uniformer(p)
    funcs = []
    for fn in p.functions:
        funcs.append(replace(fn, body=u.function(fn.name, fn.body)))
        funcs.extend(u.out)
        u.out = []
    main = u.function("main", p.main) if p.main is not None else None
    funcs.extend(u.out)
    return KernelProgram(p.data_decls, tuple(funcs), main)


def is_uniform(body: Expr) -> bool:
    root = body.scrutinee if type(body) is Case else None
    inner = [root] + [a.body for a in body.branches] if root is not None else [body]
    return not any(type(x) is Case for e in inner for x in walk(e))


# -- validation --------------------------------------------------------------


def validate(p: KernelProgram) -> list[Diagnostic]:
    """Collect every invariant violation as a diagnostic; never raises."""
    diags: list[Diagnostic] = []
    ctors = p.constructor_table()
    funcs = {f.name for f in p.functions}

    def report(kind: str, msg: str, pos) -> None:
        line, col = pos or (0, 0)
        diags.append(Diagnostic(kind, msg, line, col))

    seen_ctors: set[str] = set()
    for d in p.data_decls:
        for c, n in d.constructors:
            if c in seen_ctors:
                report("DuplicateName", f"duplicate constructor {c}", d.pos)
            seen_ctors.add(c)
            if n < 0:
                report("ArityMismatch", f"negative arity for {c}", d.pos)
    seen_funcs: set[str] = set()
    for f in p.functions:
        if f.name in seen_funcs:
            report("DuplicateName", f"duplicate definition of {f.name}", f.pos)
        seen_funcs.add(f.name)

    needs: dict[str, tuple] = {}

    def check(e: Expr, scope: frozenset[str], pos) -> None:
        stack = [(e, scope, pos)]
        while stack:
            x, sc, ps = stack.pop()
            ps = getattr(x, "pos", None) or ps
            t = type(x)
            if t is Var:
                if x.name not in sc:
                    report("UnboundName", f"unbound variable {x.name}", ps)
            elif t is FuncRef:
                if x.name not in funcs:
                    report("UnboundName", f"undefined name {x.name}", ps)
            elif t is ConApp:
                info = ctors.get(x.con)
                if info is None:
                    report("UnknownConstructor", f"unknown constructor {x.con}", ps)
                elif info[1] != len(x.args):
                    report("ArityMismatch", f"constructor {x.con} expects {info[1]} arguments, got {len(x.args)}", ps)
                stack.extend((a, sc, ps) for a in x.args)
            elif t is App:
                head = x.fun
                if type(head) is ConApp:
                    report("ArityMismatch", f"constructor {head.con} is applied to too many arguments", ps)
                stack.append((x.fun, sc, ps))
                stack.append((x.arg, sc, ps))
            elif t is Lambda:
                stack.append((x.body, sc | {x.param}, ps))
            elif t is Free:
                stack.append((x.body, sc | {x.binder}, ps))
            elif t is Let:
                inner = sc | {x.binder}
                stack.append((x.bound, inner, ps))
                stack.append((x.body, inner, ps))
            elif t is Prim:
                if x.op not in PRIM_ARITY:
                    report("UnknownPrimitive", f"unknown primitive {x.op}", ps)
                elif PRIM_ARITY[x.op] != len(x.args):
                    report("ArityMismatch", f"primitive {x.op} expects {PRIM_ARITY[x.op]} arguments", ps)
                if x.op in ("eqInt", "leqInt", "unify"):
                    needs.setdefault("True", ps)
                    needs.setdefault("False", ps)
                elif x.op == "allValues":
                    needs.setdefault("Nil", ps)
                    needs.setdefault("Cons", ps)
                stack.extend((a, sc, ps) for a in x.args)
            elif t is Case:
                stack.append((x.scrutinee, sc, ps))
                type_name: Optional[str] = None
                kinds = set()
                for a in x.branches:
                    pat = a.pattern
                    if isinstance(pat, ConPat):
                        kinds.add("con")
                        info = ctors.get(pat.con)
                        if info is None:
                            report("UnknownConstructor", f"unknown constructor {pat.con}", ps)
                        else:
                            if info[1] != len(pat.vars):
                                report("ArityMismatch", f"pattern {pat.con} expects {info[1]} variables", ps)
                            if type_name is not None and info[0] != type_name:
                                report("MixedTypeBranches", f"case branches mix {type_name} and {info[0]}", ps)
                            type_name = info[0]
                        if len(set(pat.vars)) != len(pat.vars):
                            report("DuplicateName", "pattern variables must be distinct", ps)
                    elif isinstance(pat, LitPat):
                        kinds.add("lit")
                    stack.append((a.body, sc | set(pattern_vars(pat)), ps))
                if kinds == {"con", "lit"}:
                    report("MixedTypeBranches", "case mixes constructor and literal patterns", ps)
                if "lit" in kinds and not any(isinstance(a.pattern, DefaultPat) for a in x.branches):
                    report("IncompleteCase", "a case over integer literals needs a default branch", ps)

    for f in p.functions:
        check(f.body, frozenset(f.params), f.pos)
    if p.main is not None:
        check(p.main, frozenset(), None)
    for con, pos in needs.items():
        if con not in ctors:
            report("UnknownConstructor", f"builtin operation needs constructor {con} to be declared", pos)
    return diags


def load(source_text: str) -> KernelProgram:
    """Parse, validate, flatten and normalize a program to uniform form."""
    p = parse(source_text)
    diags = validate(p)
    if diags:
        raise StaticError(diags)
    return to_uniform(flatten(p))
