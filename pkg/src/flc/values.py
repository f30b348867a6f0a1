"""Run-time value representations.

Head values are what the engine produces when it evaluates to weak head
normal form. Plain values are the effect-free representation used by the
deterministic fast path; integers stand for themselves.
"""

from __future__ import annotations

from typing import Union


class LitV:
    __slots__ = ("n",)

    def __init__(self, n: int):
        self.n = n

    def __repr__(self) -> str:
        return f"LitV({self.n})"

    def __eq__(self, other) -> bool:
        return type(other) is LitV and other.n == self.n

    def __hash__(self) -> int:
        return hash(("LitV", self.n))


class ConV:
    """Constructor cell whose fields are shared handles."""

    __slots__ = ("name", "fields")

    def __init__(self, name: str, fields: tuple = ()):
        self.name = name
        self.fields = fields

    def __repr__(self) -> str:
        return f"ConV({self.name}, {len(self.fields)} fields)"


class FunV:
    __slots__ = ("param", "body", "env")

    def __init__(self, param: str, body, env: dict):
        self.param = param
        self.body = body
        self.env = env

    def __repr__(self) -> str:
        return f"FunV(\\{self.param})"


class FreeV:
    __slots__ = ("id",)

    def __init__(self, id: int):
        self.id = id

    def __repr__(self) -> str:
        return f"FreeV({self.id})"

    def __eq__(self, other) -> bool:
        return type(other) is FreeV and other.id == self.id

    def __hash__(self) -> int:
        return hash(("FreeV", self.id))


class DetV:
    """Run-time marker: a constructor value known to be deterministic."""

    __slots__ = ("plain",)

    def __init__(self, plain: "PCon"):
        self.plain = plain

    def __repr__(self) -> str:
        return f"DetV({self.plain!r})"


HeadValue = Union[LitV, ConV, FunV, FreeV, DetV]


class PCon:
    """Plain constructor term; fields are plain values or plain thunks."""

    __slots__ = ("name", "fields", "_hash")

    def __init__(self, name: str, fields: tuple = ()):
        self.name = name
        self.fields = fields
        self._hash = None

    def __repr__(self) -> str:
        return f"PCon({self.name}, {self.fields!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PCon):
            return NotImplemented
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if type(a) is PCon and type(b) is PCon:
                if a.name != b.name or len(a.fields) != len(b.fields):
                    return False
                stack.extend(zip(a.fields, b.fields))
            elif type(a) is PCon or type(b) is PCon or a != b:
                return False
        return True

    def __hash__(self) -> int:
        if self._hash is None:
            # hash children first, deepest last-field chain iteratively
            pending = [self]
            while pending:
                x = pending[-1]
                todo = [f for f in x.fields if type(f) is PCon and f._hash is None]
                if todo:
                    pending.extend(todo)
                    continue
                pending.pop()
                if x._hash is None:
                    x._hash = hash((x.name, tuple(f._hash if type(f) is PCon else f for f in x.fields)))
        return self._hash


PlainValue = Union[int, PCon]
