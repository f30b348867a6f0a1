"""Lexer and parser for the surface syntax of ``.flc`` files.

The grammar is layout-free: case alternatives and let bindings are separated
by semicolons (braces around case alternatives are mandatory). A token in
column 1 starts a new top-level declaration, so continuation lines must be
indented.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import DuplicateName, ParseError
from .kernel import (
    Alt,
    App,
    Case,
    Choice,
    ConApp,
    ConPat,
    DataDecl,
    DefaultPat,
    Expr,
    Failed,
    Free,
    FuncDecl,
    FuncRef,
    KernelProgram,
    Lambda,
    Let,
    Lit,
    LitPat,
    Prim,
    Var,
    map_children,
)

KEYWORDS = frozenset({"data", "case", "of", "let", "in", "free", "if", "then", "else", "failed", "allValues"})

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<int>\d+)
  | (?P<uid>[A-Z][A-Za-z0-9_']*)
  | (?P<lid>[a-z_][A-Za-z0-9_']*)
  | (?P<op>=:=|==|/=|<=|>=|->|&&|\|\||&>|::|[\\=|;{}()\[\],?+\-*<>:])
    """,
    re.VERBOSE,
)

# operator -> (precedence, associativity)
BINOPS = {
    "?": (0, "r"),
    "&>": (0, "r"),
    "||": (2, "r"),
    "&&": (3, "r"),
    "==": (4, "n"),
    "/=": (4, "n"),
    "<": (4, "n"),
    "<=": (4, "n"),
    ">": (4, "n"),
    ">=": (4, "n"),
    "=:=": (4, "n"),
    ":": (5, "r"),
    "+": (6, "l"),
    "-": (6, "l"),
    "*": (7, "l"),
}


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # int | uid | lid | kw | op | sep | eof
    text: str
    line: int
    col: int

    @property
    def pos(self) -> tuple[int, int]:
        return (self.line, self.col)


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    i, line, line_start = 0, 1, 0
    n = len(src)
    while i < n:
        if src.startswith("{-", i):
            depth, j = 1, i + 2
            while j < n and depth:
                if src.startswith("{-", j):
                    depth, j = depth + 1, j + 2
                elif src.startswith("-}", j):
                    depth, j = depth - 1, j + 2
                else:
                    if src[j] == "\n":
                        line, line_start = line + 1, j + 1
                    j += 1
            if depth:
                raise ParseError("unterminated block comment", (line, i - line_start + 1))
            i = j
            continue
        m = _TOKEN.match(src, i)
        col = i - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {src[i]!r}", (line, col))
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            if kind == "lid" and text in KEYWORDS:
                kind = "kw"
            if col == 1 and toks:
                toks.append(Token("sep", ";;", line, col))
            toks.append(Token(kind, text, line, col))
        i = m.end()
    toks.append(Token("eof", "<end of input>", line, i - line_start + 1))
    return toks


@dataclass(frozen=True, slots=True)
class _Head:
    """Placeholder for a constructor or builtin awaiting saturation."""

    kind: str  # "con" | "prim"
    name: str
    pos: Optional[tuple[int, int]] = None


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0
        self.scope: frozenset[str] = frozenset()
        self.fresh = 0

    # -- token helpers -------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "kw")

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def error(self, expected: tuple[str, ...], message: Optional[str] = None):
        t = self.tok
        msg = message or f"unexpected {t.text!r}, expected {' or '.join(expected)}"
        raise ParseError(msg, t.pos, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error((repr(text),))
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            self.error((what,))
        return self.advance()

    def gensym(self, base: str) -> str:
        self.fresh += 1
        return f"{base}%{self.fresh}"

    def binder(self) -> str:
        t = self.tok
        if t.kind != "lid":
            self.error(("variable",))
        self.advance()
        return self.gensym("_") if t.text == "_" else t.text

    # -- declarations ----------------------------------------------------
    def program(self) -> KernelProgram:
        datas: list[DataDecl] = []
        funcs: list[FuncDecl] = []
        main: Optional[Expr] = None
        seen_types: set[str] = set()
        seen_cons: set[str] = set()
        seen_funcs: set[str] = set()
        while self.tok.kind != "eof":
            if self.tok.kind == "sep" or self.at(";"):
                self.advance()
                continue
            start = self.tok
            if self.at("data"):
                d = self.data_decl()
                if d.name in seen_types:
                    raise DuplicateName(f"duplicate data type {d.name}", d.pos)
                seen_types.add(d.name)
                for c, _ in d.constructors:
                    if c in seen_cons:
                        raise DuplicateName(f"duplicate constructor {c}", d.pos)
                    seen_cons.add(c)
                datas.append(d)
            elif self.tok.kind == "lid" and self.tok.text != "_":
                if self.peek().text == "::":
                    self.skip_decl()
                    continue
                f = self.func_decl()
                if f.name in seen_funcs:
                    raise DuplicateName(f"duplicate definition of {f.name}", start.pos)
                if f.name == "main":
                    main = f.body if not f.params else _lambda_chain(f.params, f.body)
                else:
                    funcs.append(f)
                seen_funcs.add(f.name)
            else:
                self.error(("declaration",))
            if self.tok.kind not in ("sep", "eof") and not self.at(";"):
                self.error(("end of declaration",))
        arity = {c: n for d in datas for c, n in d.constructors}
        sat = _Saturator(arity, self)
        funcs = [FuncDecl(f.name, f.params, sat(f.body), f.pos) for f in funcs]
        return KernelProgram(tuple(datas), tuple(funcs), sat(main) if main is not None else None)

    def skip_decl(self) -> None:
        while self.tok.kind not in ("sep", "eof"):
            self.advance()

    def data_decl(self) -> DataDecl:
        start = self.expect("data")
        name = self.expect_kind("uid", "type name").text
        params = []
        while self.tok.kind == "lid":
            params.append(self.advance().text)
        self.expect("=")
        cons = [self.con_decl()]
        while self.at("|"):
            self.advance()
            cons.append(self.con_decl())
        return DataDecl(name, tuple(params), tuple(cons), start.pos)

    def con_decl(self) -> tuple[str, int]:
        name = self.expect_kind("uid", "constructor name").text
        arity = 0
        while True:
            t = self.tok
            if t.kind in ("uid", "lid"):
                self.advance()
            elif self.at("(") or self.at("["):
                self.skip_bracketed()
            else:
                break
            arity += 1
        return name, arity

    def skip_bracketed(self) -> None:
        close = {"(": ")", "[": "]"}
        stack = [close[self.advance().text]]
        while stack:
            t = self.tok
            if t.kind == "eof":
                self.error((stack[-1],))
            self.advance()
            if t.text in close and t.kind == "op":
                stack.append(close[t.text])
            elif t.text == stack[-1] and t.kind == "op":
                stack.pop()

    def func_decl(self) -> FuncDecl:
        start = self.advance()
        params: list[str] = []
        while self.tok.kind == "lid":
            p = self.binder()
            if p in params:
                raise ParseError(f"duplicate parameter {p}", self.toks[self.i - 1].pos)
            params.append(p)
        self.expect("=")
        self.scope = frozenset(params)
        body = self.expr()
        self.scope = frozenset()
        while isinstance(body, Lambda):
            params.append(body.param)
            body = body.body
        return FuncDecl(start.text, tuple(params), body, start.pos)

    # -- expressions -------------------------------------------------------
    def expr(self, min_prec: int = 0) -> Expr:
        lhs = self.operand()
        while self.tok.kind == "op" and self.tok.text in BINOPS:
            op = self.tok.text
            prec, assoc = BINOPS[op]
            if prec < min_prec:
                break
            optok = self.advance()
            rhs = self.expr(prec if assoc == "r" else prec + 1)
            lhs = _binop(op, lhs, rhs, optok.pos)
            if assoc == "n" and self.tok.kind == "op" and BINOPS.get(self.tok.text, (None,))[0] == prec:
                self.error((), f"non-associative operator {self.tok.text!r} cannot be chained")
        return lhs

    def operand(self) -> Expr:
        t = self.tok
        if self.at("\\"):
            return self.lambda_expr()
        if self.at("let"):
            return self.let_expr()
        if self.at("case"):
            return self.case_expr()
        if self.at("if"):
            self.advance()
            c = self.expr()
            self.expect("then")
            a = self.expr()
            self.expect("else")
            b = self.expr()
            return Case(c, (Alt(ConPat("True"), a), Alt(ConPat("False"), b)), t.pos)
        if self.at("-") and self.peek().kind == "int":
            self.advance()
            return Lit(-int(self.advance().text), t.pos)
        e = self.aexp()
        if e is None:
            self.error(("expression",))
        while True:
            arg = self.aexp()
            if arg is None:
                return e
            e = App(e, arg, t.pos)

    def lambda_expr(self) -> Expr:
        start = self.expect("\\")
        params = [self.binder()]
        while self.tok.kind == "lid":
            params.append(self.binder())
        self.expect("->")
        saved = self.scope
        self.scope = saved | set(params)
        body = self.expr()
        self.scope = saved
        for p in reversed(params):
            body = Lambda(p, body, start.pos)
        return body

    def let_expr(self) -> Expr:
        start = self.expect("let")
        braced = self.at("{")
        if braced:
            self.advance()
        saved = self.scope
        bindings: list[tuple[str, Optional[Expr], tuple[int, int]]] = []
        while True:
            pos = self.tok.pos
            names = [self.binder()]
            if self.at(",") or self.at("free"):
                while self.at(","):
                    self.advance()
                    names.append(self.binder())
                self.expect("free")
                self.scope = self.scope | set(names)
                bindings.extend((n, None, pos) for n in names)
            else:
                params = []
                while self.tok.kind == "lid":
                    params.append(self.binder())
                self.expect("=")
                self.scope = self.scope | {names[0]}
                inner = self.scope
                self.scope = inner | set(params)
                bound = self.expr()
                self.scope = inner
                bindings.append((names[0], _lambda_chain(tuple(params), bound), pos))
            if self.at(";"):
                self.advance()
                if braced and self.at("}"):
                    break
                if self.at("in"):
                    break
                continue
            break
        if braced:
            self.expect("}")
        self.expect("in")
        body = self.expr()
        self.scope = saved
        for name, bound, pos in reversed(bindings):
            body = Free(name, body, pos) if bound is None else Let(name, bound, body, pos)
        return body

    def case_expr(self) -> Expr:
        start = self.expect("case")
        scrut = self.expr()
        self.expect("of")
        self.expect("{")
        alts: list[Alt] = []
        while not self.at("}"):
            alts.append(self.alt())
            if self.at(";"):
                self.advance()
            elif not self.at("}"):
                self.error(("';'", "'}'"))
        self.advance()
        if not alts:
            raise ParseError("case expression without alternatives", start.pos)
        pats = [a.pattern for a in alts]
        if any(isinstance(p, LitPat) for p in pats) and not any(isinstance(p, DefaultPat) for p in pats):
            raise ParseError("a case over integer literals needs a default branch", start.pos)
        return Case(scrut, tuple(alts), start.pos)

    def alt(self) -> Alt:
        pat = self.pattern()
        self.expect("->")
        saved = self.scope
        if isinstance(pat, ConPat):
            self.scope = saved | set(pat.vars)
        elif isinstance(pat, DefaultPat) and pat.var is not None:
            self.scope = saved | {pat.var}
        body = self.expr()
        self.scope = saved
        return Alt(pat, body)

    def pattern(self):
        t = self.tok
        if t.kind == "uid":
            self.advance()
            return ConPat(t.text, self.pattern_vars())
        if t.kind == "int":
            self.advance()
            return LitPat(int(t.text))
        if self.at("-") and self.peek().kind == "int":
            self.advance()
            return LitPat(-int(self.advance().text))
        if t.kind == "lid":
            if self.peek().text == ":":
                x = self.binder()
                self.advance()
                return ConPat("Cons", self._distinct((x, self.binder())))
            self.advance()
            return DefaultPat(None if t.text == "_" else t.text)
        if self.at("["):
            self.advance()
            self.expect("]")
            return ConPat("Nil")
        if self.at("("):
            self.advance()
            if self.tok.kind == "uid":
                name = self.advance().text
                pat = ConPat(name, self.pattern_vars())
            else:
                x = self.binder()
                if self.at(":"):
                    self.advance()
                    pat = ConPat("Cons", self._distinct((x, self.binder())))
                elif self.at(","):
                    self.advance()
                    pat = ConPat("Pair", self._distinct((x, self.binder())))
                else:
                    self.error(("':'", "','"))
            self.expect(")")
            return pat
        self.error(("pattern",))

    def pattern_vars(self) -> tuple[str, ...]:
        names = []
        while True:
            if self.tok.kind == "lid":
                names.append(self.binder())
            elif self.at("(") or self.at("[") or self.tok.kind in ("uid", "int"):
                self.error((), "nested patterns are not supported")
            else:
                return self._distinct(tuple(names))

    def _distinct(self, names: tuple[str, ...]) -> tuple[str, ...]:
        if len(set(names)) != len(names):
            self.error((), "pattern variables must be distinct")
        return names

    def aexp(self) -> Optional[Expr]:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Lit(int(t.text), t.pos)
        if t.kind == "lid":
            if t.text == "_":
                self.error((), "wildcard '_' is not an expression")
            self.advance()
            return Var(t.text, t.pos) if t.text in self.scope else FuncRef(t.text, t.pos)
        if t.kind == "uid":
            self.advance()
            return _Head("con", t.text, t.pos)
        if self.at("failed"):
            self.advance()
            return Failed(t.pos)
        if self.at("allValues"):
            self.advance()
            return _Head("prim", "allValues", t.pos)
        if self.at("["):
            self.advance()
            items = []
            if not self.at("]"):
                items.append(self.expr())
                while self.at(","):
                    self.advance()
                    items.append(self.expr())
            self.expect("]")
            out: Expr = ConApp("Nil", (), t.pos)
            for x in reversed(items):
                out = ConApp("Cons", (x, out), t.pos)
            return out
        if self.at("("):
            self.advance()
            if self.tok.kind == "op" and self.tok.text in BINOPS and self.peek().text == ")":
                op = self.advance().text
                self.advance()
                a, b = self.gensym("a"), self.gensym("b")
                return Lambda(a, Lambda(b, _binop(op, Var(a), Var(b), t.pos), t.pos), t.pos)
            e = self.expr()
            if self.at(","):
                self.advance()
                e2 = self.expr()
                if self.at(","):
                    self.error((), "only pairs are supported as tuples")
                self.expect(")")
                return ConApp("Pair", (e, e2), t.pos)
            self.expect(")")
            return e
        return None


def _lambda_chain(params: tuple[str, ...], body: Expr) -> Expr:
    for p in reversed(params):
        body = Lambda(p, body)
    return body


def _not(e: Expr, pos) -> Expr:
    return Case(e, (Alt(ConPat("True"), ConApp("False")), Alt(ConPat("False"), ConApp("True"))), pos)


def _binop(op: str, a: Expr, b: Expr, pos) -> Expr:
    if op == "?":
        return Choice(a, b, pos)
    if op == "&>":
        return Case(a, (Alt(ConPat("True"), b),), pos)
    if op == "||":
        return Case(a, (Alt(ConPat("True"), ConApp("True")), Alt(ConPat("False"), b)), pos)
    if op == "&&":
        return Case(a, (Alt(ConPat("False"), ConApp("False")), Alt(ConPat("True"), b)), pos)
    if op == ":":
        return ConApp("Cons", (a, b), pos)
    if op == "=:=":
        return Prim("unify", (a, b), pos)
    if op == "==":
        return Prim("eqInt", (a, b), pos)
    if op == "/=":
        return _not(Prim("eqInt", (a, b), pos), pos)
    if op == "<=":
        return Prim("leqInt", (a, b), pos)
    if op == "<":
        return Prim("leqInt", (Prim("add", (a, Lit(1)), pos), b), pos)
    if op == ">":
        return _not(Prim("leqInt", (a, b), pos), pos)
    if op == ">=":
        return _not(Prim("leqInt", (Prim("add", (a, Lit(1)), pos), b), pos), pos)
    return Prim({"+": "add", "-": "sub", "*": "mul"}[op], (a, b), pos)


class _Saturator:
    """Turn constructor and builtin heads into saturated nodes.

    Under-applied heads are eta-expanded into lambdas. Unknown constructors
    are kept as ``ConApp`` so that validation can report them.
    """

    def __init__(self, arity: dict[str, int], parser: Parser):
        self.arity = arity
        self.parser = parser

    def __call__(self, e: Expr) -> Expr:
        spine: list[Expr] = []
        head = e
        while isinstance(head, App):
            spine.append(head.arg)
            head = head.fun
        if isinstance(head, _Head):
            args = [self(a) for a in reversed(spine)]
            if head.kind == "con":
                n = self.arity.get(head.name, len(args))
                mk = lambda xs: ConApp(head.name, tuple(xs), head.pos)  # noqa: E731
            else:
                n = 1
                mk = lambda xs: Prim(head.name, tuple(xs), head.pos)  # noqa: E731
            if len(args) >= n:
                out: Expr = mk(args[:n])
                for extra in args[n:]:
                    out = App(out, extra, head.pos)
                return out
            extra = [self.parser.gensym("x") for _ in range(n - len(args))]
            return _lambda_chain(tuple(extra), mk(args + [Var(x) for x in extra]))
        return map_children(e, self)


def parse(source_text: str) -> KernelProgram:
    """Parse and name-resolve a program."""
    return Parser(source_text).program()


def parse_expr(source_text: str, scope: frozenset[str] = frozenset(), arity: Optional[dict[str, int]] = None) -> Expr:
    """Parse a standalone expression (used by tests and tooling)."""
    p = Parser(source_text)
    p.scope = scope
    e = p.expr()
    if p.tok.kind != "eof":
        p.error(("end of input",))
    return _Saturator(arity or {}, p)(e)
