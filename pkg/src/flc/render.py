"""Textual rendering of fully evaluated values.

Integers print as themselves, constructor terms in prefix form with
parentheses around compound arguments, proper lists as ``[1,2]`` and pairs
as ``(a,b)``. Unbound free variables get ``_a``, ``_b``, ... in order of
first occurrence within one value.
"""

from __future__ import annotations

from .runtime import Const
from .values import ConV, DetV, FreeV, FunV, LitV, PCon

FUNCTION = "<function>"


def _view(x):
    """Normalize any value representation to (kind, payload)."""
    t = type(x)
    if t is Const:
        return _view(x.value)
    if t is int:
        return "int", x
    if t is LitV:
        return "int", x.n
    if t is PCon:
        return "con", (x.name, x.fields)
    if t is DetV:
        return "con", (x.plain.name, x.plain.fields)
    if t is ConV:
        return "con", (x.name, x.fields)
    if t is FreeV:
        return "free", x.id
    if t is FunV:
        return "fun", None
    memo = getattr(x, "memo", None)
    if memo:
        return _view(next(iter(memo.values()))[0])
    return "fun", None


def _var_name(k: int) -> str:
    letter = chr(ord("a") + k % 26)
    return f"_{letter}" if k < 26 else f"_{letter}{k // 26}"


class _Renderer:
    def __init__(self):
        self.names: dict[int, str] = {}

    def free(self, vid: int) -> str:
        name = self.names.get(vid)
        if name is None:
            name = self.names[vid] = _var_name(len(self.names))
        return name

    def atom(self, x) -> str:
        kind, payload = _view(x)
        s = self.term(x)
        if kind == "int" and payload < 0:
            return f"({s})"
        if kind == "con":
            name, fields = payload
            if fields and not s.startswith("[") and not (name == "Pair" and len(fields) == 2):
                return f"({s})"
        return s

    def term(self, x) -> str:
        kind, payload = _view(x)
        if kind == "int":
            return str(payload)
        if kind == "free":
            return self.free(payload)
        if kind == "fun":
            return FUNCTION
        name, fields = payload
        if name == "Nil" and not fields:
            return "[]"
        if name == "Cons" and len(fields) == 2:
            return self.cons(fields)
        if name == "Pair" and len(fields) == 2:
            return f"({self.term(fields[0])},{self.term(fields[1])})"
        if not fields:
            return name
        return " ".join([name] + [self.atom(f) for f in fields])

    def cons(self, fields) -> str:
        items = []
        tail = None
        while True:
            items.append(fields[0])
            kind, payload = _view(fields[1])
            if kind == "con" and payload[0] == "Cons" and len(payload[1]) == 2:
                fields = payload[1]
                continue
            if kind == "con" and payload[0] == "Nil" and not payload[1]:
                break
            tail = fields[1]
            break
        if tail is None:
            return "[" + ",".join(self.term(i) for i in items) + "]"
        parts = [self.atom(i) for i in items]
        out = f"Cons {parts[-1]} {self.atom(tail)}"
        for p in reversed(parts[:-1]):
            out = f"Cons {p} ({out})"
        return out


def render(value) -> str:
    """Render one fully evaluated value."""
    return _Renderer().term(value)
