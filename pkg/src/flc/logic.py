"""Free variables, narrowing and unification over the per-branch heap.

The engine's machine performs these steps inline; this module owns the
binding representation, the instantiation rule and the public entry points.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AlreadyBound
from .runtime import Branch, BranchState, Const
from .values import ConV, FreeV


@dataclass(frozen=True, slots=True)
class BoundValue:
    handle: object


@dataclass(frozen=True, slots=True)
class BoundVar:
    id: int


def bind(state: BranchState, vid: int, binding) -> BranchState:
    """Write a heap binding; the write moves to a fresh branch."""
    heap = dict(state.heap)
    heap[vid] = binding
    return BranchState(Branch(state.supply.fresh(), state.branch), heap, state.supply)


def narrow_table(ctor_lists: dict[str, tuple]) -> dict[str, tuple]:
    """Data-type name to its constructor list; kept as-is for lookups."""
    return dict(ctor_lists)


def instantiate_alternatives(vid: int, ctors, state: BranchState, stats=None):
    """One (cell, state) pair per constructor, in declaration order.

    Each alternative gets fresh free variables for the constructor fields and
    a fresh branch whose heap binds ``vid`` to the new cell.
    """
    if vid in state.heap:
        raise AlreadyBound(f"variable {vid} is already bound")
    if stats is not None:
        stats.narrow_instantiations += 1
    supply = state.supply
    out = []
    for name, arity in ctors:
        cell = ConV(name, tuple(Const(FreeV(supply.fresh())) for _ in range(arity)))
        heap = dict(state.heap)
        heap[vid] = BoundValue(Const(cell))
        out.append((cell, BranchState(Branch(supply.fresh(), state.branch), heap, supply)))
    return out


# -- public entry points -----------------------------------------------------


def fresh_free(state: BranchState) -> tuple[FreeV, BranchState]:
    return FreeV(state.supply.fresh()), state


def instantiate(rt, vid: int, ctors, state: BranchState):
    """Choice tree of the alternatives, each leaf holding the new cell."""
    from .engine import RETURN, Pending, alternatives_tree

    alts = instantiate_alternatives(vid, ctors, state, rt.stats)
    return alternatives_tree(rt, [Pending(rt, RETURN, cell, None, None, st) for cell, st in alts])


def deref(rt, value, state: BranchState):
    """Tree of head values after following heap bindings."""
    from .engine import F_DEREF, RETURN, Pending

    return Pending(rt, RETURN, value, None, ((F_DEREF,), None), state)


def unify(rt, a, b, state: BranchState):
    """Unify two handles; leaves hold the success token ``True``."""
    from .engine import F_U1, FORCE, Pending

    return Pending(rt, FORCE, a, None, ((F_U1, b), None), state)


def unify_constraint(rt, a, b, state: BranchState):
    """The ``=:=`` primitive: exactly ``unify``."""
    return unify(rt, a, b, state)
