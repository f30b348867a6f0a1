"""The evaluator.

Programs are first translated into a small IR with precomputed case tables
and fast-path call sites. Evaluation is an explicit-continuation machine that
never recurses on the host stack: a ``Pending`` holds one machine
configuration, and each ``step`` runs a bounded number of transitions. A
configuration ends in a value (``Leaf``), a failure (``EMPTY``) or a choice
(``Node`` of two new configurations).
"""

from __future__ import annotations

from typing import Optional

from .detopt import DetInfo, FastAbort, FastPath, analyze_determinism, fast_closed, lift_det_value, unwrap_det
from .errors import DynamicTypeError, NarrowUnsupported
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
from .logic import BoundValue, BoundVar, bind, instantiate_alternatives
from .runtime import (
    Branch,
    BranchState,
    Const,
    IdSupply,
    SharedThunk,
    Stats,
    lookup_task_result,
    valid_keys,
)
from .tree import EMPTY, Leaf, Node, Suspended
from .values import ConV, DetV, FreeV, FunV, LitV

QUANTUM = 32

# machine modes
EVAL, RETURN, FORCE, ENCAP = 0, 1, 2, 3

# continuation frame tags
F_APPLY = 0
F_CASE = 1
F_UPDATE = 2
F_PRIM_L = 3
F_PRIM_R = 4
F_U1 = 5
F_U2 = 6
F_U2R = 7
F_UREST = 8
F_NF = 9
F_NFC = 10
F_DEREF = 11

EMPTY_ENV: dict = {}
_NO = object()
TICK = object()


# -- IR ----------------------------------------------------------------------


class NVar:
    __slots__ = ("name", "pos")

    def __init__(self, name, pos):
        self.name, self.pos = name, pos


class NFunc:
    __slots__ = ("fn", "site", "pos")

    def __init__(self, fn, site, pos):
        self.fn, self.site, self.pos = fn, site, pos


class NLit:
    __slots__ = ("value", "pos")

    def __init__(self, n, pos):
        self.value, self.pos = LitV(n), pos


class NCon:
    __slots__ = ("name", "args", "value", "pos")

    def __init__(self, name, args, pos):
        self.name, self.args, self.pos = name, args, pos
        self.value = ConV(name, ()) if not args else None


class NApp:
    __slots__ = ("fun", "arg", "site", "pos")

    def __init__(self, fun, arg, site, pos):
        self.fun, self.arg, self.site, self.pos = fun, arg, site, pos


class NLam:
    __slots__ = ("param", "body", "pos")

    def __init__(self, param, body, pos):
        self.param, self.body, self.pos = param, body, pos


class NLet:
    __slots__ = ("binder", "bound", "body", "pos")

    def __init__(self, binder, bound, body, pos):
        self.binder, self.bound, self.body, self.pos = binder, bound, body, pos


class NCase:
    __slots__ = ("scrut", "scrut_var", "cons", "lits", "default", "ctors", "owner", "pos")

    def __init__(self, scrut, cons, lits, default, ctors, owner, pos):
        self.scrut = scrut
        self.scrut_var = scrut.name if type(scrut) is NVar else None
        self.cons, self.lits, self.default = cons, lits, default
        self.ctors, self.owner, self.pos = ctors, owner, pos


class NChoice:
    __slots__ = ("left", "right", "pos")

    def __init__(self, left, right, pos):
        self.left, self.right, self.pos = left, right, pos


class NFailed:
    __slots__ = ("pos",)

    def __init__(self, pos):
        self.pos = pos


class NFree:
    __slots__ = ("binder", "body", "pos")

    def __init__(self, binder, body, pos):
        self.binder, self.body, self.pos = binder, body, pos


class NPrim:
    __slots__ = ("op", "args", "pos")

    def __init__(self, op, args, pos):
        self.op, self.args, self.pos = op, args, pos


class FnInfo:
    """A top-level function: its lambda chain as a constant closure."""

    __slots__ = ("name", "params", "body", "entry", "fast_safe")

    def __init__(self, name, params, fast_safe):
        self.name, self.params, self.fast_safe = name, params, fast_safe
        self.body = None
        self.entry = None


class FastSite:
    """A call that can run on the fast path when its variables hold plain values."""

    __slots__ = ("expr", "vars", "fn", "disabled")

    def __init__(self, expr, vars):
        self.expr, self.vars = expr, vars
        self.fn = None
        self.disabled = False


class CaseOwner:
    """Root case of a fast-path-safe function, scrutinizing a parameter."""

    __slots__ = ("fn", "index", "disabled")

    def __init__(self, fn, index):
        self.fn, self.index = fn, index
        self.disabled = False


# -- runtime -----------------------------------------------------------------


class Runtime:
    """Everything one evaluation run shares: program, id supply, stats."""

    def __init__(
        self,
        program: KernelProgram,
        det_opt: bool = True,
        check_invariants: bool = False,
        encap_strategy: str = "dfs",
        quantum: int = QUANTUM,
    ):
        self.program = program
        self.det_opt = det_opt
        self.check_invariants = check_invariants
        self.encap_strategy = encap_strategy
        self.quantum = quantum
        self.stats = Stats()
        self.supply = IdSupply()
        self.root = BranchState(Branch(self.supply.fresh()), {}, self.supply)
        self.base_ids = self.supply.issued
        self.ctor_info = program.constructor_table()
        self.type_ctors = program.type_constructors()
        self.det: DetInfo = analyze_determinism(program)
        self.fast = FastPath(program, self.det)
        self.arity = {f.name: len(f.params) for f in program.functions}
        self.TRUE = ConV("True") if "True" in self.ctor_info else None
        self.FALSE = ConV("False") if "False" in self.ctor_info else None
        self.functions: dict[str, FnInfo] = {
            f.name: FnInfo(f.name, f.params, self.det.fast_safe.get(f.name, False)) for f in program.functions
        }
        self.live_thunks: list = [] if check_invariants else None
        for f in program.functions:
            info = self.functions[f.name]
            owner = None
            if info.fast_safe and type(f.body) is Case and type(f.body.scrutinee) is Var:
                if f.body.scrutinee.name in f.params:
                    owner = CaseOwner(info, f.params.index(f.body.scrutinee.name))
            body = self.prepare(f.body, owner)
            info.body = body
            if f.params:
                chain = body
                for p in reversed(f.params[1:]):
                    chain = NLam(p, chain, f.pos)
                info.entry = FunV(f.params[0], chain, EMPTY_ENV)
        self.main = self.prepare(program.main) if program.main is not None else None

    # -- IR translation ----------------------------------------------------
    def prepare(self, e: Expr, owner: Optional[CaseOwner] = None):
        t = type(e)
        pos = getattr(e, "pos", None)
        if t is Var:
            return NVar(e.name, pos)
        if t is Lit:
            return NLit(e.value, pos)
        if t is FuncRef:
            fn = self.functions.get(e.name)
            if fn is None:
                raise DynamicTypeError(f"undefined function {e.name}", pos)
            site = FastSite(e, ()) if fn.fast_safe and not fn.params else None
            return NFunc(fn, site, pos)
        if t is ConApp:
            return NCon(e.con, tuple(self.prepare(a) for a in e.args), pos)
        if t is App:
            site = None
            head = e
            n = 0
            while type(head) is App:
                head, n = head.fun, n + 1
            if (
                type(head) is FuncRef
                and self.det.fast_safe.get(head.name)
                and self.arity.get(head.name) == n
                and fast_closed(e, self.det, self.arity)
            ):
                site = FastSite(e, tuple(free_vars(e)))
            return NApp(self.prepare(e.fun), self.prepare(e.arg), site, pos)
        if t is Lambda:
            return NLam(e.param, self.prepare(e.body), pos)
        if t is Let:
            return NLet(e.binder, self.prepare(e.bound), self.prepare(e.body), pos)
        if t is Case:
            cons, lits, default, ctors = {}, {}, None, ()
            for a in e.branches:
                pat = a.pattern
                if isinstance(pat, ConPat):
                    cons.setdefault(pat.con, (pat.vars, self.prepare(a.body)))
                elif isinstance(pat, LitPat):
                    lits.setdefault(pat.value, self.prepare(a.body))
                elif isinstance(pat, DefaultPat) and default is None:
                    default = (pat.var, self.prepare(a.body))
            if cons:
                info = self.ctor_info.get(next(iter(cons)))
                if info is not None:
                    ctors = self.type_ctors[info[0]]
            return NCase(self.prepare(e.scrutinee), cons, lits, default, ctors, owner, pos)
        if t is Choice:
            return NChoice(self.prepare(e.left), self.prepare(e.right), pos)
        if t is Failed:
            return NFailed(pos)
        if t is Free:
            return NFree(e.binder, self.prepare(e.body), pos)
        if t is Prim:
            return NPrim(e.op, tuple(self.prepare(a) for a in e.args), pos)
        raise TypeError(f"not an expression: {e!r}")

    # -- helpers -----------------------------------------------------------
    def fresh_ids_drawn(self) -> int:
        return self.supply.issued - self.base_ids

    def snapshot(self) -> Stats:
        self.stats.fresh_ids_drawn = self.fresh_ids_drawn()
        return self.stats

    def share(self, expr, env, state: BranchState, label=None) -> SharedThunk:
        self.stats.shared_thunk_allocations += 1
        t = SharedThunk(expr, env, state.branch, label)
        if self.live_thunks is not None:
            self.live_thunks.append(t)
        return t

    def bind_arg(self, node, env, state: BranchState):
        """Fig-4 style argument binding: local variables are passed as-is."""
        if type(node) is NVar:
            return env[node.name], state
        return self.share(node, env, state), state

    def plain_of(self, h, state: BranchState):
        if type(h) is Const:
            v = h.value
        else:
            e = lookup_task_result(h.memo, state.branch) if h.memo else None
            if e is None or e[1]:
                return _NO
            v = e[0]
        tv = type(v)
        if tv is LitV:
            return v.n
        if tv is DetV:
            return v.plain
        return _NO

    def try_site(self, site: FastSite, env, state: BranchState):
        vals = []
        for name in site.vars:
            pv = self.plain_of(env[name], state)
            if pv is _NO:
                return None
            vals.append(pv)
        if site.fn is None:
            site.fn = self.fast.compile_site(site.expr, site.vars)
        try:
            r = self.fast.run(site.fn, vals)
        except FastAbort:
            site.disabled = True
            self.stats.fast_path_aborts += 1
            return None
        self.stats.fast_path_calls += 1
        return lift_det_value(r)

    def try_owner(self, owner: CaseOwner, scrut_plain, env, state: BranchState):
        fn = owner.fn
        vals = []
        for i, p in enumerate(fn.params):
            if i == owner.index:
                vals.append(scrut_plain)
                continue
            pv = self.plain_of(env[p], state)
            if pv is _NO:
                return None
            vals.append(pv)
        try:
            r = self.fast.run(self.fast.function(fn.name)[0], vals)
        except FastAbort:
            owner.disabled = True
            self.stats.fast_path_aborts += 1
            return None
        self.stats.fast_path_calls += 1
        return lift_det_value(r)

    def check_memo_invariant(self, state: BranchState) -> None:
        for t in self.live_thunks or ():
            keys = valid_keys(t.memo, state.branch)
            if len(keys) > 1:
                raise AssertionError(f"{t!r} has {len(keys)} valid entries in {state.branch!r}")

    # -- entry points --------------------------------------------------------
    def eval_main(self, normalize: bool = True) -> "Pending":
        if self.main is None:
            raise DynamicTypeError("program has no main")
        kont = NF_KONT if normalize else None
        return Pending(self, EVAL, self.main, EMPTY_ENV, kont, self.root)


NF_KONT = ((F_NF,), None)


def alternatives_tree(rt: Runtime, alts: list):
    if not alts:
        return EMPTY
    t = alts[-1]
    for alt in reversed(alts[:-1]):
        rt.stats.choice_nodes += 1
        t = Node(alt, t)
    return t


def _type_error(msg: str, pos=None):
    raise DynamicTypeError(msg, pos)


def _describe(v) -> str:
    t = type(v)
    if t is LitV:
        return f"integer {v.n}"
    if t is ConV:
        return f"constructor {v.name}"
    if t is DetV:
        return f"constructor {v.plain.name}"
    if t is FunV:
        return "function"
    return "free variable"


class Pending(Suspended):
    """One suspended machine configuration."""

    __slots__ = ("rt", "mode", "a", "b", "kont", "state")

    def __init__(self, rt: Runtime, mode: int, a, b, kont, state: BranchState):
        super().__init__()
        self.rt = rt
        self.mode = mode
        self.a = a
        self.b = b
        self.kont = kont
        self.state = state

    def _advance(self):
        r = self._run(self.rt.quantum)
        if r is not None:
            self.a = self.b = self.kont = self.state = None
        return r

    def _run(self, quantum: int):
        rt = self.rt
        stats = rt.stats
        mode, a, b, kont, state = self.mode, self.a, self.b, self.kont, self.state
        steps = 0
        result = None
        try:
            while steps < quantum:
                steps += 1
                if mode == EVAL:
                    t = type(a)
                    if t is NVar:
                        a = b[a.name]
                        mode = FORCE
                    elif t is NApp:
                        site = a.site
                        if site is not None and rt.det_opt and not site.disabled:
                            v = rt.try_site(site, b, state)
                            if v is not None:
                                a, mode = v, RETURN
                                continue
                        arg = a.arg
                        if type(arg) is NVar:
                            h = b[arg.name]
                        else:
                            h = rt.share(arg, b, state)
                        kont = ((F_APPLY, h), kont)
                        a = a.fun
                    elif t is NFunc:
                        fn = a.fn
                        stats.calls_by_function[fn.name] += 1
                        site = a.site
                        if site is not None and rt.det_opt and not site.disabled:
                            v = rt.try_site(site, b, state)
                            if v is not None:
                                a, mode = v, RETURN
                                continue
                        if fn.entry is not None:
                            a, mode = fn.entry, RETURN
                        else:
                            a, b = fn.body, EMPTY_ENV
                    elif t is NCase:
                        kont = ((F_CASE, a, b), kont)
                        if a.scrut_var is not None:
                            a, mode = b[a.scrut_var], FORCE
                        else:
                            a = a.scrut
                    elif t is NCon:
                        if a.value is not None:
                            a = a.value
                        else:
                            fields = tuple(
                                b[x.name] if type(x) is NVar else rt.share(x, b, state) for x in a.args
                            )
                            a = ConV(a.name, fields)
                        mode = RETURN
                    elif t is NLit:
                        a, mode = a.value, RETURN
                    elif t is NLet:
                        bound = a.bound
                        env = dict(b)
                        if type(bound) is NVar and bound.name != a.binder:
                            env[a.binder] = b[bound.name]
                        else:
                            env[a.binder] = rt.share(bound, env, state, a.binder)
                        a, b = a.body, env
                    elif t is NLam:
                        a, mode = FunV(a.param, a.body, b), RETURN
                    elif t is NChoice:
                        stats.choice_nodes += 1
                        sl = BranchState(Branch(state.supply.fresh(), state.branch), state.heap, state.supply)
                        sr = BranchState(Branch(state.supply.fresh(), state.branch), state.heap, state.supply)
                        result = Node(Pending(rt, EVAL, a.left, b, kont, sl), Pending(rt, EVAL, a.right, b, kont, sr))
                        break
                    elif t is NFailed:
                        result = EMPTY
                        break
                    elif t is NFree:
                        env = dict(b)
                        env[a.binder] = Const(FreeV(state.supply.fresh()))
                        a, b = a.body, env
                    elif t is NPrim:
                        op = a.op
                        args = a.args
                        if op == "unify":
                            h1 = b[args[0].name] if type(args[0]) is NVar else rt.share(args[0], b, state)
                            h2 = b[args[1].name] if type(args[1]) is NVar else rt.share(args[1], b, state)
                            kont = ((F_U1, h2), kont)
                            a, mode = h1, FORCE
                        elif op == "allValues":
                            from .search import encapsulated

                            inner = Pending(rt, EVAL, args[0], b, NF_KONT, state)
                            a, b, mode = encapsulated(inner, rt.encap_strategy), [], ENCAP
                        else:
                            kont = ((F_PRIM_L, a, b), kont)
                            x = args[0]
                            if type(x) is NVar:
                                a, mode = b[x.name], FORCE
                            else:
                                a = x
                    else:
                        raise TypeError(f"bad IR node {a!r}")

                elif mode == FORCE:
                    h = a
                    if type(h) is Const:
                        a, mode = h.value, RETURN
                        continue
                    memo = h.memo
                    if memo:
                        e = lookup_task_result(memo, state.branch, stats)
                        if e is not None:
                            a, mode = e[0], RETURN
                            if e[1]:
                                state = BranchState(Branch(state.supply.fresh(), state.branch), state.heap, state.supply)
                            continue
                    stats.shared_body_evaluations += 1
                    h.eval_count += 1
                    if h.label is not None:
                        stats.evaluations_by_label[h.label] += 1
                    kont = ((F_UPDATE, h, state.branch), kont)
                    a, b, mode = h.expr, h.env, EVAL

                elif mode == RETURN:
                    if kont is None:
                        result = Leaf(a, state)
                        break
                    frame, kont = kont
                    tag = frame[0]
                    v = a
                    tv = type(v)

                    if tag == F_UPDATE:
                        h, b2 = frame[1], frame[2]
                        br = state.branch
                        nd = br is not b2
                        h.memo[br if nd else h.b1] = (v, nd)
                        if rt.check_invariants:
                            rt.check_memo_invariant(state)
                        continue

                    if tv is FreeV and tag != F_U2 and tag != F_U2R:
                        bnd = state.heap.get(v.id)
                        if bnd is not None:
                            state = BranchState(Branch(state.supply.fresh(), state.branch), state.heap, state.supply)
                            kont = (frame, kont)
                            if type(bnd) is BoundVar:
                                a = FreeV(bnd.id)
                            else:
                                a, mode = bnd.handle, FORCE
                            continue

                    if tag == F_CASE:
                        node, env = frame[1], frame[2]
                        if tv is DetV:
                            owner = node.owner
                            if owner is not None and rt.det_opt and not owner.disabled:
                                r = rt.try_owner(owner, v.plain, env, state)
                                if r is not None:
                                    a = r
                                    continue
                            v = unwrap_det(v)
                            tv = ConV
                        if tv is ConV:
                            alt = node.cons.get(v.name)
                            if alt is not None:
                                names, body = alt
                                if names:
                                    env = dict(env)
                                    for n, f in zip(names, v.fields):
                                        env[n] = f
                                a, b, mode = body, env, EVAL
                                continue
                            if node.cons or node.lits:
                                _type_error(f"case over {_describe(v)} does not match its branches", node.pos)
                        elif tv is LitV:
                            if node.cons:
                                _type_error(f"case expects a constructor, got {_describe(v)}", node.pos)
                            body = node.lits.get(v.n)
                            if body is not None:
                                a, b, mode = body, env, EVAL
                                continue
                        elif tv is FreeV:
                            if node.cons:
                                alts = instantiate_alternatives(v.id, node.ctors, state, stats)
                                result = alternatives_tree(
                                    rt, [Pending(rt, RETURN, cell, None, ((F_CASE, node, env), kont), st) for cell, st in alts]
                                )
                                break
                            if node.lits:
                                raise NarrowUnsupported("cannot narrow a free variable of integer type", node.pos)
                        elif tv is FunV:
                            if node.cons or node.lits:
                                _type_error("case over a function", node.pos)
                        if node.default is None:
                            _type_error(f"no branch for {_describe(v)}", node.pos)
                        var, body = node.default
                        if var is not None:
                            env = dict(env)
                            env[var] = Const(a)
                        a, b, mode = body, env, EVAL
                        continue

                    if tag == F_APPLY:
                        if tv is FunV:
                            env = dict(v.env)
                            env[v.param] = frame[1]
                            a, b, mode = v.body, env, EVAL
                            continue
                        _type_error(f"cannot apply {_describe(v)}")

                    if tag == F_PRIM_L or tag == F_PRIM_R:
                        node = frame[1]
                        if tv is not LitV:
                            if tv is FreeV:
                                raise NarrowUnsupported("arithmetic on an unbound free variable", node.pos)
                            _type_error(f"{node.op} expects integers, got {_describe(v)}", node.pos)
                        if tag == F_PRIM_L:
                            kont = ((F_PRIM_R, node, v.n), kont)
                            x = node.args[1]
                            env = frame[2]
                            if type(x) is NVar:
                                a, mode = env[x.name], FORCE
                            else:
                                a, b, mode = x, env, EVAL
                            continue
                        x, y, op = frame[2], v.n, node.op
                        if op == "add":
                            a = LitV(x + y)
                        elif op == "sub":
                            a = LitV(x - y)
                        elif op == "mul":
                            a = LitV(x * y)
                        elif op == "eqInt":
                            a = rt.TRUE if x == y else rt.FALSE
                        else:
                            a = rt.TRUE if x <= y else rt.FALSE
                        continue

                    if tag == F_U1:
                        kont = ((F_U2, v), kont)
                        a, mode = frame[1], FORCE
                        continue

                    if tag == F_U2 or tag == F_U2R:
                        # follow bindings on both sides before comparing
                        if tag == F_U2:
                            left, right = frame[1], v
                        else:
                            left, right = v, frame[1]
                        moved = False
                        for side in (0, 1):
                            x = left if side == 0 else right
                            if type(x) is FreeV:
                                bnd = state.heap.get(x.id)
                                if bnd is not None:
                                    state = BranchState(
                                        Branch(state.supply.fresh(), state.branch), state.heap, state.supply
                                    )
                                    if side == 0:
                                        kont = ((F_U2R, right), kont)
                                    else:
                                        kont = ((F_U2, left), kont)
                                    if type(bnd) is BoundVar:
                                        a = FreeV(bnd.id)
                                    else:
                                        a, mode = bnd.handle, FORCE
                                    moved = True
                                    break
                        if moved:
                            continue
                        tl, tr = type(left), type(right)
                        if tl is DetV:
                            left, tl = unwrap_det(left), ConV
                        if tr is DetV:
                            right, tr = unwrap_det(right), ConV
                        if tl is FreeV:
                            if tr is FreeV:
                                if left.id != right.id:
                                    state = bind(state, left.id, BoundVar(right.id))
                                a = rt.TRUE
                            elif tr is LitV:
                                state = bind(state, left.id, BoundValue(Const(right)))
                                a = rt.TRUE
                            elif tr is ConV:
                                ctors = self._ctors_of(right.name)
                                alts = instantiate_alternatives(left.id, ctors, state, stats)
                                result = alternatives_tree(
                                    rt, [Pending(rt, RETURN, cell, None, ((F_U2R, right), kont), st) for cell, st in alts]
                                )
                                break
                            else:
                                _type_error("cannot unify a free variable with a function")
                            continue
                        if tr is FreeV:
                            if tl is LitV:
                                state = bind(state, right.id, BoundValue(Const(left)))
                                a = rt.TRUE
                            elif tl is ConV:
                                ctors = self._ctors_of(left.name)
                                alts = instantiate_alternatives(right.id, ctors, state, stats)
                                result = alternatives_tree(
                                    rt, [Pending(rt, RETURN, cell, None, ((F_U2, left), kont), st) for cell, st in alts]
                                )
                                break
                            else:
                                _type_error("cannot unify a free variable with a function")
                            continue
                        if tl is LitV and tr is LitV:
                            if left.n == right.n:
                                a = rt.TRUE
                                continue
                            result = EMPTY
                            break
                        if tl is ConV and tr is ConV:
                            if left.name != right.name:
                                if self._ctor_type(left.name) != self._ctor_type(right.name):
                                    _type_error(f"cannot unify {_describe(left)} with {_describe(right)}")
                                result = EMPTY
                                break
                            pairs = tuple(zip(left.fields, right.fields))
                            if not pairs:
                                a = rt.TRUE
                                continue
                            kont = ((F_UREST, pairs, 1), kont)
                            kont = ((F_U1, pairs[0][1]), kont)
                            a, mode = pairs[0][0], FORCE
                            continue
                        _type_error(f"cannot unify {_describe(left)} with {_describe(right)}")

                    if tag == F_UREST:
                        pairs, i = frame[1], frame[2]
                        if i < len(pairs):
                            kont = ((F_UREST, pairs, i + 1), kont)
                            kont = ((F_U1, pairs[i][1]), kont)
                            a, mode = pairs[i][0], FORCE
                            continue
                        a = rt.TRUE
                        continue

                    if tag == F_NF:
                        if tv is ConV and v.fields:
                            kont = ((F_NFC, v.name, (), v.fields), kont)
                            kont = (NF_FRAME, kont)
                            a, mode = v.fields[0], FORCE
                        continue

                    if tag == F_NFC:
                        done = frame[2] + (Const(v),)
                        fields = frame[3]
                        i = len(done)
                        if i < len(fields):
                            kont = ((F_NFC, frame[1], done, fields), kont)
                            kont = (NF_FRAME, kont)
                            a, mode = fields[i], FORCE
                            continue
                        a = ConV(frame[1], done)
                        continue

                    if tag == F_DEREF:
                        continue

                    raise TypeError(f"bad frame {frame!r}")

                else:  # ENCAP
                    r = next(a, _NO)
                    if r is TICK:
                        steps += quantum
                        continue
                    if r is _NO:
                        from .search import list_value

                        a, mode = list_value(rt, b), RETURN
                        continue
                    b.append(r)
        finally:
            stats.engine_steps += steps
        if result is None:
            self.mode, self.a, self.b, self.kont, self.state = mode, a, b, kont, state
        return result

    def _ctors_of(self, con: str):
        info = self.rt.ctor_info.get(con)
        if info is None:
            _type_error(f"unknown constructor {con}")
        return self.rt.type_ctors[info[0]]

    def _ctor_type(self, con: str):
        info = self.rt.ctor_info.get(con)
        return info[0] if info else None


NF_FRAME = (F_NF,)


# -- public operations -------------------------------------------------------


class Computation:
    """A suspended evaluation: expression plus environment."""

    __slots__ = ("expr", "env")

    def __init__(self, expr, env=None):
        self.expr = expr
        self.env = env if env is not None else {}


def _node(rt: Runtime, expr):
    return rt.prepare(expr) if not isinstance(expr, tuple(_IR_TYPES)) else expr


_IR_TYPES = (NVar, NFunc, NLit, NCon, NApp, NLam, NLet, NCase, NChoice, NFailed, NFree, NPrim)


def eval_head(rt: Runtime, c: Computation, s: BranchState) -> Pending:
    """Tree of weak head normal forms of ``c``."""
    return Pending(rt, EVAL, _node(rt, c.expr), c.env, None, s)


def apply_value(rt: Runtime, f, arg, s: BranchState) -> Pending:
    return Pending(rt, RETURN, f, None, ((F_APPLY, arg), None), s)


def bind_arg(rt: Runtime, e, env, s: BranchState):
    return rt.bind_arg(_node(rt, e), env, s)


def share(rt: Runtime, c: Computation, s: BranchState, label=None) -> SharedThunk:
    return rt.share(_node(rt, c.expr), c.env, s, label)


def force_shared(rt: Runtime, t, s: BranchState) -> Pending:
    return Pending(rt, FORCE, t, None, None, s)


def make_choice(rt: Runtime, left: Computation, right: Computation, s: BranchState) -> Node:
    rt.stats.choice_nodes += 1
    sl = BranchState(Branch(s.supply.fresh(), s.branch), s.heap, s.supply)
    sr = BranchState(Branch(s.supply.fresh(), s.branch), s.heap, s.supply)
    return Node(
        Pending(rt, EVAL, _node(rt, left.expr), left.env, None, sl),
        Pending(rt, EVAL, _node(rt, right.expr), right.env, None, sr),
    )


def scrutinize(rt: Runtime, t, case: Case, env, s: BranchState) -> Pending:
    """Force ``t`` and continue with the matching branch of ``case``."""
    node = rt.prepare(Case(Var("%scrut"), case.branches))
    node.scrut_var = None
    return Pending(rt, FORCE, t, None, ((F_CASE, node, env), None), s)
