from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from flc.errors import DuplicateName, MixedTypeBranches, ParseError, StaticError, UnknownConstructor
from flc.kernel import (
    Alt,
    App,
    Case,
    Choice,
    ConApp,
    ConPat,
    Failed,
    FuncDecl,
    FuncRef,
    KernelProgram,
    Lambda,
    Lit,
    LitPat,
    Var,
    walk,
)
from flc.oracle import oracle_enumerate
from flc.parser import parse, parse_expr
from flc.transform import flatten, is_uniform, load, to_uniform, validate

from conftest import CORPUS, PRELUDE
from corpus_cases import ORACLE_CASES

BOOL = "data Bool = False | True\n"
LIST = "data List a = Nil | Cons a (List a)\n"


def kinds(p):
    return [d.kind for d in validate(p)]


# -- parse -------------------------------------------------------------------


def test_parse_not_with_explicit_lambda():
    p = parse(BOOL + "not = \\x -> case x of { False -> True; True -> False }")
    assert len(p.data_decls) == 1
    assert p.data_decls[0].constructors == (("False", 0), ("True", 0))
    (f,) = p.functions
    assert f.name == "not" and f.params == ("x",)
    assert isinstance(f.body, Case) and len(f.body.branches) == 2


def test_parse_empty_program():
    p = parse("")
    assert p.data_decls == () and p.functions == () and p.main is None


def test_parse_insert_flat_form():
    src = LIST + (
        "insert = \\x -> \\xs -> case xs of { Nil -> Cons x Nil;"
        " Cons y ys -> Cons x (Cons y ys) ? Cons y (insert x ys) }"
    )
    (f,) = parse(src).functions
    assert f.params == ("x", "xs")
    nil, cons = f.body.branches
    assert nil.pattern == ConPat("Nil", ())
    assert cons.pattern == ConPat("Cons", ("y", "ys"))
    assert isinstance(cons.body, Choice)
    assert cons.body.right == ConApp("Cons", (Var("y"), App(App(FuncRef("insert"), Var("x")), Var("ys"))))


def test_list_sugar_and_cons_operator():
    e = parse_expr("1 : [2, 3]")
    assert e == ConApp("Cons", (Lit(1), ConApp("Cons", (Lit(2), ConApp("Cons", (Lit(3), ConApp("Nil", ())))))))


def test_partial_constructor_is_eta_expanded():
    p = parse(LIST + "f = Cons 1")
    (f,) = p.functions
    assert isinstance(f.body, Lambda)
    assert f.body.body == ConApp("Cons", (Lit(1), Var(f.body.param)))
    assert validate(p) == []


def test_type_signatures_are_ignored():
    p = parse(BOOL + "not :: Bool -> Bool\nnot x = case x of { False -> True; True -> False }")
    assert [f.name for f in p.functions] == ["not"]


def test_comments_are_skipped():
    p = parse("-- line\n{- block {- nested -} -}\nmain = 1")
    assert p.main == Lit(1)


def test_syntax_error_carries_position_and_expectation():
    with pytest.raises(ParseError) as info:
        parse("main = case 1 of 1 -> 2")
    err = info.value
    assert err.pos == (1, 18)
    assert err.expected
    assert err.diagnostic().format("x.flc").startswith("x.flc:1:18: ")


@pytest.mark.parametrize(
    "src",
    [
        BOOL + "data Bool = A",
        BOOL + "data T = True",
        "f = 1\nf = 2",
    ],
)
def test_duplicate_names_are_rejected(src):
    with pytest.raises(DuplicateName):
        parse(src)


def test_nested_patterns_are_rejected():
    with pytest.raises(ParseError):
        parse(LIST + "f xs = case xs of { Cons (Cons a b) c -> 1; _ -> 0 }")


# -- flatten -------------------------------------------------------------------


def test_flatten_completes_missing_branch_with_failed():
    p = flatten(parse(BOOL + "f x = case x of { False -> 1 }"))
    (f,) = p.functions
    assert [a.pattern.con for a in f.body.branches] == ["False", "True"]
    assert f.body.branches[1].body == Failed()


def test_flatten_keeps_complete_case():
    p = parse(BOOL + "f x = case x of { False -> 1; True -> 2 }")
    assert flatten(p) == p


def test_flatten_orders_branches_by_declaration():
    p = flatten(parse(BOOL + "f x = case x of { True -> 1; False -> 2 }"))
    assert [a.pattern.con for a in p.functions[0].body.branches] == ["False", "True"]


def test_flatten_rejects_mixed_types():
    p = parse(BOOL + LIST + "f x = case x of { Nil -> 1; True -> 2 }")
    with pytest.raises(MixedTypeBranches):
        flatten(p)
    assert "MixedTypeBranches" in kinds(p)


def test_flatten_rejects_unknown_constructor():
    p = parse(BOOL + "f x = case x of { Maybe -> 1 }")
    with pytest.raises(UnknownConstructor):
        flatten(p)


def test_named_default_rebuilds_the_value():
    p = flatten(parse(BOOL + "f x = case x of { False -> True; y -> y }"))
    true_alt = p.functions[0].body.branches[1]
    assert true_alt.body.binder == "y" and true_alt.body.bound == ConApp("True", ())


def test_every_flattened_case_is_complete():
    for path in sorted(CORPUS.glob("*.flc")):
        p = flatten(parse(path.read_text()))
        types = p.type_constructors()
        table = p.constructor_table()
        for f in p.functions:
            for e in walk(f.body):
                if isinstance(e, Case) and isinstance(e.branches[0].pattern, ConPat):
                    ty = table[e.branches[0].pattern.con][0]
                    assert len(e.branches) == len(types[ty]), (path.name, f.name)


# -- uniform form ----------------------------------------------------------------


def test_to_uniform_lifts_nested_case():
    src = BOOL + "f x y = case x of { False -> 0; True -> case y of { False -> 1; True -> 2 } }"
    p = to_uniform(flatten(parse(src)))
    names = [f.name for f in p.functions]
    assert len(names) == 2
    lifted = p.function(names[1])
    assert lifted.params == ("y",)
    assert all(is_uniform(f.body) for f in p.functions)
    flat = flatten(parse(src + "\nmain = f True False ? f True True ? f False True"))
    assert oracle_enumerate(flat) == oracle_enumerate(to_uniform(flat))


def test_to_uniform_leaves_case_free_bodies_alone():
    p = flatten(parse(BOOL + "f x = x"))
    assert to_uniform(p) == p


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.flc")), ids=lambda p: p.stem)
def test_passes_are_idempotent(path):
    p = parse(path.read_text())
    once = flatten(p)
    assert flatten(once) == once
    u = to_uniform(once)
    assert to_uniform(u) == u
    assert all(is_uniform(f.body) for f in u.functions)


@pytest.mark.parametrize("case", [c for c in ORACLE_CASES if not c.caps], ids=lambda c: c.name)
def test_to_uniform_preserves_oracle_values(case):
    p = flatten(parse((CORPUS / f"{case.name}.flc").read_text()))
    assert oracle_enumerate(p) == oracle_enumerate(to_uniform(p))


# -- validate ----------------------------------------------------------------------


def test_validate_accepts_insert():
    assert validate(parse(PRELUDE)) == []


def test_validate_reports_unknown_constructor():
    assert kinds(parse("main = Foo")) == ["UnknownConstructor"]


def test_validate_reports_unbound_and_arity():
    p = parse(LIST + "f x = g x\nmain = Cons 1 2 3")
    assert set(kinds(p)) == {"UnboundName", "ArityMismatch"}


def test_validate_literal_case_needs_default():
    with pytest.raises(ParseError):
        parse("f n = case n of { 0 -> 1 }")
    body = Case(Var("n"), (Alt(LitPat(0), Lit(1)),))
    p = KernelProgram((), (FuncDecl("f", ("n",), body),), None)
    assert kinds(p) == ["IncompleteCase"]


def test_validate_comparisons_need_bool():
    assert kinds(parse("main = 1 == 2")) == ["UnknownConstructor", "UnknownConstructor"]


def test_load_raises_static_error_with_all_diagnostics():
    with pytest.raises(StaticError) as info:
        load("main = Foo + bar")
    assert sorted(d.kind for d in info.value.diagnostics) == ["UnboundName", "UnknownConstructor"]


@given(st.lists(st.sampled_from(["False", "True"]), min_size=1, max_size=2, unique=True))
def test_flatten_branch_count_is_constructor_count(present):
    alts = "; ".join(f"{c} -> {i}" for i, c in enumerate(present))
    p = flatten(parse(BOOL + f"f x = case x of {{ {alts} }}"))
    assert len(p.functions[0].body.branches) == 2
