"""Branch identifiers, the id supply, per-branch state and shared thunks.

A branch is a node in the tree of non-deterministic decisions. Each node keeps
a pointer to its parent plus a skew-binary jump pointer, so "is this branch an
ancestor of that one" costs O(log depth) while the full parent set stays
available on demand.
"""

from __future__ import annotations

import threading
from collections import Counter
from dataclasses import dataclass, field, fields
from typing import Optional

from .errors import CounterExhausted

ID_LIMIT = 1 << 64


class IdSupply:
    """Global counter of unissued ids, safe to share between threads."""

    __slots__ = ("_next", "_lock")

    def __init__(self, start: int = 0):
        self._next = start
        self._lock = threading.Lock()

    def fresh(self) -> int:
        with self._lock:
            v = self._next
            if v >= ID_LIMIT:
                raise CounterExhausted("id supply exhausted")
            self._next = v + 1
            return v

    @property
    def issued(self) -> int:
        return self._next


class Branch:
    __slots__ = ("id", "parent", "depth", "jump")

    def __init__(self, id: int, parent: Optional["Branch"] = None):
        self.id = id
        self.parent = parent
        if parent is None:
            self.depth = 0
            self.jump = self
        else:
            self.depth = parent.depth + 1
            j = parent.jump
            if j is not parent and parent.depth - j.depth == j.depth - j.jump.depth:
                self.jump = j.jump
            else:
                self.jump = parent

    def ancestor_at(self, depth: int) -> "Branch":
        x = self
        while x.depth > depth:
            x = x.jump if x.jump.depth >= depth else x.parent
        return x

    def descends_from(self, other: "Branch") -> bool:
        """True if ``other`` is this branch or one of its ancestors."""
        return other.depth <= self.depth and self.ancestor_at(other.depth) is other

    def parent_ids(self) -> frozenset[int]:
        out = []
        x = self.parent
        while x is not None:
            out.append(x.id)
            x = x.parent
        return frozenset(out)

    def __repr__(self) -> str:
        return f"Branch({self.id}@{self.depth})"


class BranchState:
    """Evaluation context owned by exactly one in-flight computation.

    ``heap`` maps free-variable ids to bindings. It is never mutated in place:
    every write produces a new dict, so sibling branches stay isolated.
    """

    __slots__ = ("branch", "heap", "supply")

    def __init__(self, branch: Branch, heap: dict, supply: IdSupply):
        self.branch = branch
        self.heap = heap
        self.supply = supply

    @property
    def parents(self) -> frozenset[int]:
        return self.branch.parent_ids()

    def child(self) -> "BranchState":
        """Fresh branch below the current one, same heap."""
        return BranchState(Branch(self.supply.fresh(), self.branch), self.heap, self.supply)

    def __repr__(self) -> str:
        return f"BranchState({self.branch!r}, heap={len(self.heap)})"


def initial_state(supply: Optional[IdSupply] = None) -> BranchState:
    supply = supply or IdSupply()
    return BranchState(Branch(supply.fresh()), {}, supply)


def fresh_id(state: BranchState) -> int:
    return state.supply.fresh()


def advance(state: BranchState) -> BranchState:
    """Move to a fresh branch id, keeping the old one as a parent."""
    return state.child()


# -- shared thunks -----------------------------------------------------------


class SharedThunk:
    """A suspended computation plus its task result map.

    ``memo`` maps a Branch to ``(value, was_nondet)``. ``b1`` is the branch
    that was active when the thunk was created; deterministic results are
    stored under it so that every descendant branch can reuse them.
    """

    __slots__ = ("expr", "env", "memo", "b1", "label", "eval_count")

    def __init__(self, expr, env, b1: Branch, label: Optional[str] = None):
        self.expr = expr
        self.env = env
        self.memo: dict = {}
        self.b1 = b1
        self.label = label
        self.eval_count = 0

    def __repr__(self) -> str:
        return f"SharedThunk({self.label or '?'}, entries={len(self.memo)})"


class Const:
    """A handle to an already evaluated head value (no memo map needed)."""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __repr__(self) -> str:
        return f"Const({self.value!r})"


def lookup_task_result(memo: dict, branch: Branch, stats: Optional["Stats"] = None):
    """Return the entry valid in ``branch`` (direct key or ancestor key)."""
    e = memo.get(branch)
    if e is not None:
        if stats is not None:
            stats.memo_hits_local += 1
        return e
    if not memo:
        return None
    if len(memo) <= branch.depth:
        for k, v in memo.items():
            if k.depth < branch.depth and branch.ancestor_at(k.depth) is k:
                if stats is not None:
                    stats.memo_hits_global += 1
                return v
        return None
    x = branch.parent
    while x is not None:
        v = memo.get(x)
        if v is not None:
            if stats is not None:
                stats.memo_hits_global += 1
            return v
        x = x.parent
    return None


def valid_keys(memo: dict, branch: Branch) -> list[Branch]:
    """All keys of ``memo`` visible from ``branch``; at most one is allowed."""
    return [k for k in memo if branch.descends_from(k)]


def insert_task_result(memo: dict, key: Branch, value, was_nondet: bool) -> None:
    memo[key] = (value, was_nondet)


# -- statistics --------------------------------------------------------------

STAT_KEYS = (
    "shared_thunk_allocations",
    "shared_body_evaluations",
    "memo_hits_local",
    "memo_hits_global",
    "choice_nodes",
    "fresh_ids_drawn",
    "narrow_instantiations",
    "fast_path_calls",
    "wall_time_ms",
)


@dataclass
class Stats:
    shared_thunk_allocations: int = 0
    shared_body_evaluations: int = 0
    memo_hits_local: int = 0
    memo_hits_global: int = 0
    choice_nodes: int = 0
    fresh_ids_drawn: int = 0
    narrow_instantiations: int = 0
    fast_path_calls: int = 0
    wall_time_ms: float = 0.0
    engine_steps: int = 0
    expansion_steps: int = 0
    fast_path_aborts: int = 0
    evaluations_by_label: Counter = field(default_factory=Counter)
    calls_by_function: Counter = field(default_factory=Counter)

    def record(self) -> dict:
        """Flat key/value view (per-label counters are flattened)."""
        d = {f.name: getattr(self, f.name) for f in fields(self) if not isinstance(getattr(self, f.name), Counter)}
        by_label, calls = self.evaluations_by_label, self.calls_by_function
        for k in sorted(by_label):
            d[f"evaluations.{k}"] = by_label[k]
        for k in sorted(calls):
            d[f"calls.{k}"] = calls[k]
        return d
