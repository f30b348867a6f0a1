from __future__ import annotations

from collections import Counter

import pytest

from flc.engine import Computation, Runtime, apply_value, bind_arg, eval_head, make_choice, scrutinize, share
from flc.errors import DynamicTypeError
from flc.kernel import Case
from flc.parser import parse_expr
from flc.render import render
from flc.runtime import Const
from flc.search import BFS, DFS, FAIR, IDS, Budget, enumerate_tree
from flc.transform import load
from flc.tree import EMPTY, Leaf, Node, expand_fully, leaves
from flc.values import ConV, FunV, LitV

from conftest import PRELUDE, corpus_source, expr_in, multiset, run_src, values_of, with_main


def runtime(src: str = PRELUDE, det_opt: bool = False) -> Runtime:
    return Runtime(load(src), det_opt=det_opt)


def heads(rt: Runtime, tree) -> list[str]:
    return [render(v) for v in enumerate_tree(tree)]


# -- eval_head ------------------------------------------------------------------------


def test_choice_of_constructors_is_a_node_of_leaves():
    rt = runtime()
    t = expand_fully(eval_head(rt, expr_in(rt, "False ? True"), rt.root))
    assert isinstance(t, Node)
    assert [render(v) for v in leaves(t)] == ["False", "True"]


def test_failed_is_empty():
    rt = runtime()
    assert expand_fully(eval_head(rt, expr_in(rt, "failed"), rt.root)) is EMPTY


def test_xor_self_is_always_false():
    src = corpus_source("xorSelf")
    for strategy in (DFS, BFS, IDS, FAIR):
        assert multiset(src, strategy=strategy) == Counter({"False": 2})


def test_head_value_leaves_fields_unevaluated():
    rt = runtime()
    (v,) = list(enumerate_tree(eval_head(rt, expr_in(rt, "Cons loop Nil"), rt.root)))
    assert isinstance(v, ConV) and v.name == "Cons"
    assert v.fields[0].eval_count == 0


def test_let_bound_choice_is_consistent():
    assert sorted(values_of(with_main("let x = 1 ? 2 in x + x"))) == ["2", "4"]


def test_laziness_of_unused_arguments():
    assert values_of(with_main("const 1 failed")) == ["1"]
    assert values_of(with_main("const 1 loop")) == ["1"]


def test_prim_on_constructor_is_a_type_error():
    with pytest.raises(DynamicTypeError) as info:
        values_of(with_main("1 + True"))
    assert info.value.pos is not None


def test_case_over_literals_uses_default():
    src = with_main("case 1 ? 5 of { 1 -> 10; n -> n * 2 }")
    assert values_of(src) == ["10", "10"]


# -- apply_value ----------------------------------------------------------------------


def test_apply_identity():
    rt = runtime()
    f = FunV("x", rt.prepare(parse_expr("x", frozenset({"x"}))), {})
    assert heads(rt, apply_value(rt, f, Const(LitV(5)), rt.root)) == ["5"]


def test_apply_function_choice_branches_in_function_position():
    assert values_of(corpus_source("idOrNot")) == ["False", "True"]


def test_apply_literal_is_a_type_error():
    rt = runtime()
    with pytest.raises(DynamicTypeError):
        heads(rt, apply_value(rt, LitV(3), Const(LitV(1)), rt.root))


def test_partial_application_is_a_function():
    assert values_of(with_main("append [1]")) == ["<function>"]
    assert values_of(with_main("let f = append [1] in f [2]")) == ["[1,2]"]


# -- bind_arg ---------------------------------------------------------------------------


def test_bind_arg_reuses_local_variable_handle():
    rt = runtime()
    h = Const(LitV(1))
    got, _ = bind_arg(rt, parse_expr("xs", frozenset({"xs"})), {"xs": h}, rt.root)
    assert got is h
    assert rt.stats.shared_thunk_allocations == 0


def test_bind_arg_shares_complex_expressions_lazily():
    rt = runtime()
    got, _ = bind_arg(rt, parse_expr("loop", frozenset(), {"loop": 0}), {}, rt.root)
    assert got.eval_count == 0 and rt.stats.shared_thunk_allocations == 1


def rev_share_sites(n: int) -> int:
    """Share sites for ``rev [1..n]`` under the alias rule.

    main's argument (1), the list literal's fields (2n), ``rev ys`` and
    ``[y]`` per cons (2n), the ``Nil`` field of each ``[y]`` (n) and one
    ``append`` thunk per cons cell copied by append (n(n-1)/2).
    """
    return 1 + 2 * n + 2 * n + n + n * (n - 1) // 2


@pytest.mark.parametrize("n", [3, 6])
def test_reverse_shares_only_at_alias_rule_sites(n):
    src = corpus_source("naiveReverse").replace("main = rev (upto 1 512)", "")
    lit = "[" + ",".join(str(i) for i in range(1, n + 1)) + "]"
    values, rt, _ = run_src(src + f"\nmain = rev {lit}", det_opt=False)
    assert values == ["[" + ",".join(str(i) for i in range(n, 0, -1)) + "]"]
    assert rt.stats.shared_thunk_allocations == rev_share_sites(n)


# -- make_choice ------------------------------------------------------------------------


def test_make_choice_draws_two_ids_and_inherits_parent():
    rt = runtime()
    before = rt.supply.issued
    node = make_choice(rt, expr_in(rt, "1"), expr_in(rt, "2"), rt.root)
    assert rt.supply.issued - before == 2
    l, r = node.left.state, node.right.state
    assert l.branch.id != r.branch.id
    assert rt.root.branch.id in l.parents and rt.root.branch.id in r.parents


def test_nested_choice_uses_four_ids():
    rt = runtime()
    before = rt.supply.issued
    assert heads(rt, eval_head(rt, expr_in(rt, "(1 ? 2) ? 3"), rt.root)) == ["1", "2", "3"]
    assert rt.supply.issued - before == 4


def test_choice_does_not_evaluate_left_eagerly():
    src = with_main("loop ? True")
    values, _, stream = run_src(src, budget=Budget(max_steps=500))
    assert values == [] and stream.status == "exhausted"


# -- scrutinize -----------------------------------------------------------------------------


def case_of(text: str) -> Case:
    return parse_expr(text, frozenset({"s"}))


def test_scrutinize_binds_existing_field_handles():
    rt = runtime(PRELUDE + "\nmain = 0")
    one, nil = Const(LitV(1)), Const(ConV("Nil"))
    cell = Const(ConV("Cons", (one, nil)))
    case = case_of("case s of { Nil -> Nil; Cons y ys -> Pair y ys }")
    (v,) = list(enumerate_tree(scrutinize(rt, cell, case, {}, rt.root)))
    assert v.name == "Pair" and v.fields[0] is one and v.fields[1] is nil


def test_scrutinize_failed_scrutinee_is_empty():
    rt = runtime()
    t = share(rt, expr_in(rt, "failed"), rt.root)
    case = case_of("case s of { False -> 0; True -> 1 }")
    assert expand_fully(scrutinize(rt, t, case, {}, rt.root)) is EMPTY


def test_scrutinize_narrows_a_free_variable():
    assert values_of(corpus_source("narrowBool")) == ["0", "1"]


def test_case_on_wrong_constructor_type_is_an_error():
    src = PRELUDE + "\nf x = case x of { False -> 0; True -> 1 }\nmain = f Nil"
    with pytest.raises(DynamicTypeError):
        values_of(src)


# -- engine-wide properties -----------------------------------------------------------------


@pytest.mark.parametrize("name", ["perm4", "addNum5", "queens6", "select10", "lastUnify"])
def test_stats_are_identical_across_runs(name):
    def record():
        _, rt, _ = run_src(corpus_source(name))
        rec = rt.snapshot().record()
        rec.pop("wall_time_ms")
        return rec

    assert record() == record()


def test_notif_is_true_or_false():
    assert sorted(values_of(corpus_source("notIf"))) == ["False", "True"]


def test_leaves_hold_their_branch_state():
    rt = runtime(corpus_source("insert"))
    ids = [leaf.state.branch.id for leaf in enumerate_tree(rt.eval_main(), DFS, leaves=True)]
    assert len(set(ids)) == 3


def test_function_values_render_as_placeholder():
    assert values_of(with_main("[not]")) == ["[<function>]"]


def test_computation_defaults_to_empty_env():
    c = Computation(parse_expr("1"))
    assert c.env == {}


def test_leaf_repr_and_node_shapes():
    assert repr(Leaf(1)) == "Leaf(1)"
    assert repr(EMPTY) == "Empty"
