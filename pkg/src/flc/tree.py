"""Lazily expanded choice trees.

A tree is ``EMPTY``, a ``Leaf``, a ``Node`` or a ``Suspended`` computation
that turns into one of the other three after some number of ``step`` calls.
Traversals only ever call ``step``; each call is one unit of budget.
"""

from __future__ import annotations

from typing import Callable, Optional


class Empty:
    __slots__ = ()

    def __repr__(self) -> str:
        return "Empty"


EMPTY = Empty()


class Leaf:
    __slots__ = ("value", "state")

    def __init__(self, value, state=None):
        self.value = value
        self.state = state

    def __repr__(self) -> str:
        return f"Leaf({self.value!r})"


class Node:
    __slots__ = ("left", "right")

    def __init__(self, left, right):
        self.left = left
        self.right = right

    def __repr__(self) -> str:
        return f"Node({self.left!r}, {self.right!r})"


class Suspended:
    """A tree that is not expanded yet.

    Subclasses implement ``_advance``, returning the expanded tree or ``None``
    when more work is needed. The expansion is cached, so re-visiting a
    resolved suspension (as iterative deepening does) costs nothing.
    """

    __slots__ = ("result",)

    def __init__(self):
        self.result = None

    def step(self):
        if self.result is None:
            r = self._advance()
            if r is not None:
                self.result = r
            return r
        return self.result

    def _advance(self):
        raise NotImplementedError


class Lazy(Suspended):
    """Suspension backed by a thunk; resolves in one step."""

    __slots__ = ("fn",)

    def __init__(self, fn: Callable[[], object]):
        super().__init__()
        self.fn = fn

    def _advance(self):
        fn, self.fn = self.fn, None
        return fn()


class Diverge(Suspended):
    """Suspension that never resolves; counts how often it was stepped."""

    __slots__ = ("steps",)

    def __init__(self):
        super().__init__()
        self.steps = 0

    def _advance(self) -> Optional[object]:
        self.steps += 1
        return None


def expand_fully(t, max_steps: int = 10**6):
    """Resolve every suspension of a finite tree (test helper)."""
    steps = 0

    def go(x):
        nonlocal steps
        while isinstance(x, Suspended):
            r = x.step()
            steps += 1
            if steps > max_steps:
                raise RuntimeError("tree did not finish expanding")
            x = r if r is not None else x
        if isinstance(x, Node):
            return Node(go(x.left), go(x.right))
        return x

    return go(t)


def leaves(t) -> list:
    """Left-to-right leaf values of a fully expanded tree."""
    out, stack = [], [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Node):
            stack.append(x.right)
            stack.append(x.left)
        elif isinstance(x, Leaf):
            out.append(x.value)
    return out
