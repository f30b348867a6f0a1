"""Search strategies over choice trees, normal forms and encapsulation.

Every strategy is a generator that yields ``TICK`` right before it expands a
suspension and a ``Leaf`` whenever it finds a value. ``ValueStream`` turns
that into a value iterator with a step and value budget. The same generators
drive encapsulated search inside a running computation, where the ticks let
the outer machine interleave the inner work with its own.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator, Optional

from .detopt import lift_det_value, to_plain
from .engine import EVAL, NF_KONT, RETURN, TICK, Computation, Pending, Runtime, _node
from .runtime import BranchState, Const
from .tree import Leaf, Node, Suspended
from .values import ConV, PCon


@dataclass(frozen=True)
class Strategy:
    kind: str = "dfs"  # dfs | bfs | ids | fair
    initial_depth: int = 1
    growth: int = 2

    def __post_init__(self):
        if self.kind not in ("dfs", "bfs", "ids", "fair"):
            raise ValueError(f"unknown strategy {self.kind}")
        if self.initial_depth < 1 or self.growth < 2:
            raise ValueError("iterative deepening needs initial_depth >= 1 and growth >= 2")


DFS = Strategy("dfs")
BFS = Strategy("bfs")
IDS = Strategy("ids")
FAIR = Strategy("fair")


@dataclass(frozen=True)
class Budget:
    max_steps: Optional[int] = None
    max_values: Optional[int] = None

    def __post_init__(self):
        for v in (self.max_steps, self.max_values):
            if v is not None and v < 0:
                raise ValueError("budget limits must be non-negative")


UNLIMITED = Budget()


def _resolve(x):
    """Expand ``x`` until it is no longer suspended, ticking before each step."""
    while isinstance(x, Suspended):
        r = x.result
        if r is None:
            yield TICK
            r = x.step()
            if r is None:
                continue
        x = r
    return x


def dfs_leaves(t) -> Iterator:
    stack = [t]
    while stack:
        x = yield from _resolve(stack.pop())
        if type(x) is Node:
            stack.append(x.right)
            stack.append(x.left)
        elif type(x) is Leaf:
            yield x


def bfs_leaves(t) -> Iterator:
    queue = deque([t])
    while queue:
        x = yield from _resolve(queue.popleft())
        if type(x) is Node:
            queue.append(x.left)
            queue.append(x.right)
        elif type(x) is Leaf:
            yield x


def ids_leaves(t, initial_depth: int = 1, growth: int = 2, info: Optional[dict] = None) -> Iterator:
    """Depth-limited passes with limits d, d*g, d*g^2, ...

    A leaf is reported only in the first pass whose limit covers its depth.
    """
    info = info if info is not None else {}
    info["passes"] = 0
    limit, prev = initial_depth, -1
    while True:
        info["passes"] += 1
        cut = False
        stack = [(t, 0)]
        while stack:
            node, depth = stack.pop()
            x = yield from _resolve(node)
            if type(x) is Node:
                if depth + 1 > limit:
                    cut = True
                else:
                    stack.append((x.right, depth + 1))
                    stack.append((x.left, depth + 1))
            elif type(x) is Leaf and depth > prev:
                yield x
        if not cut:
            return
        prev, limit = limit, limit * growth


def fair_leaves(t) -> Iterator:
    """Round-robin over the frontier: one expansion step per turn."""
    queue = deque([t])
    while queue:
        x = queue.popleft()
        while isinstance(x, Suspended) and x.result is not None:
            x = x.result
        if isinstance(x, Suspended):
            yield TICK
            r = x.step()
            queue.append(x if r is None else r)
            continue
        if type(x) is Node:
            queue.append(x.left)
            queue.append(x.right)
        elif type(x) is Leaf:
            yield x


def leaves_for(t, strategy: Strategy, info: Optional[dict] = None) -> Iterator:
    if strategy.kind == "dfs":
        return dfs_leaves(t)
    if strategy.kind == "bfs":
        return bfs_leaves(t)
    if strategy.kind == "ids":
        return ids_leaves(t, strategy.initial_depth, strategy.growth, info)
    return fair_leaves(t)


class ValueStream:
    """Demand-driven values of a tree under a budget.

    ``status`` is ``running`` until the stream ends, then one of
    ``complete`` (tree exhausted), ``exhausted`` (step budget used up),
    ``limited`` (value budget reached) or ``abandoned`` (closed early).
    """

    def __init__(self, gen: Iterator, budget: Budget = UNLIMITED, stats=None, leaves: bool = False, info=None):
        self._gen = gen
        self.budget = budget
        self.stats = stats
        self.leaves = leaves
        self.info = info if info is not None else {}
        self.steps = 0
        self.count = 0
        self.status = "running"

    def __iter__(self):
        return self

    def __next__(self):
        if self.status != "running":
            raise StopIteration
        max_steps, max_values = self.budget.max_steps, self.budget.max_values
        if max_values is not None and self.count >= max_values:
            self._finish("limited")
            raise StopIteration
        for item in self._gen:
            if item is TICK:
                if max_steps is not None and self.steps >= max_steps:
                    self._finish("exhausted")
                    raise StopIteration
                self.steps += 1
                if self.stats is not None:
                    self.stats.expansion_steps += 1
                continue
            self.count += 1
            return item if self.leaves else item.value
        self.status = "complete"
        raise StopIteration

    @property
    def passes(self) -> int:
        return self.info.get("passes", 0)

    def _finish(self, status: str) -> None:
        self.status = status
        self._gen.close()

    def close(self) -> None:
        if self.status == "running":
            self._finish("abandoned")


def enumerate_tree(t, strategy: Strategy = DFS, budget: Budget = UNLIMITED, stats=None, leaves=False) -> ValueStream:
    info: dict = {}
    return ValueStream(leaves_for(t, strategy, info), budget, stats, leaves, info)


def dfs_enumerate(t, budget: Budget = UNLIMITED, **kw) -> ValueStream:
    return enumerate_tree(t, DFS, budget, **kw)


def bfs_enumerate(t, budget: Budget = UNLIMITED, **kw) -> ValueStream:
    return enumerate_tree(t, BFS, budget, **kw)


def ids_enumerate(t, budget: Budget = UNLIMITED, initial_depth: int = 1, growth: int = 2, **kw) -> ValueStream:
    return enumerate_tree(t, Strategy("ids", initial_depth, growth), budget, **kw)


def fair_enumerate(t, budget: Budget = UNLIMITED, **kw) -> ValueStream:
    return enumerate_tree(t, FAIR, budget, **kw)


# -- normal forms and encapsulation -------------------------------------------


def normal_form(rt: Runtime, v, s: BranchState) -> Pending:
    """Tree of fully evaluated versions of head value ``v``."""
    return Pending(rt, RETURN, v, None, NF_KONT, s)


def list_value(rt: Runtime, values: list):
    """Build a runtime list; with the fast path on, mark it deterministic."""
    if rt.det_opt:
        plains = [to_plain(v) for v in values]
        if all(p is not None for p in plains):
            out = PCon("Nil")
            for p in reversed(plains):
                out = PCon("Cons", (p, out))
            return lift_det_value(out)
    out = ConV("Nil")
    for v in reversed(values):
        out = ConV("Cons", (Const(v), Const(out)))
    return out


def encapsulated(inner: Pending, strategy: str = "dfs"):
    """Generator used by the machine: yields ``TICK`` or a normalized value."""
    for item in leaves_for(inner, Strategy(strategy)):
        yield item if item is TICK else item.value


def all_values(rt: Runtime, c: Computation, s: BranchState, strat: Strategy = DFS):
    """Strong encapsulation: every value of ``c`` as one runtime list."""
    inner = Pending(rt, EVAL, _node(rt, c.expr), c.env, NF_KONT, s)
    values = [leaf.value for leaf in leaves_for(inner, strat) if leaf is not TICK]
    return list_value(rt, values)
