from __future__ import annotations

from collections import Counter

import pytest

from flc.errors import OracleTimeout, OracleUnsupported
from flc.oracle import oracle_enumerate, oracle_values, render_oracle
from flc.parser import parse_expr
from flc.search import Budget
from flc.transform import load

from conftest import PRELUDE, corpus_source, multiset, with_main
from corpus_cases import ORACLE_CASES


def oracle(src: str, **caps) -> Counter:
    return oracle_enumerate(load(src), **caps)


def test_let_is_call_time_choice():
    assert oracle(with_main("let x = 1 ? 2 in x + x")) == Counter({"2": 1, "4": 1})


def test_unshared_choice_is_independent():
    assert oracle(with_main("(1 ? 2) + (1 ? 2)")) == Counter({"2": 1, "3": 2, "4": 1})


def test_xor_self():
    assert oracle(corpus_source("xorSelf")) == Counter({"False": 2})


def test_perm4_has_24_distinct_values():
    got = oracle(corpus_source("perm4"))
    assert sum(got.values()) == 24 and len(got) == 24


def test_failed_has_no_values():
    assert oracle(corpus_source("failed")) == Counter()


def test_all_values_collects_inner_values():
    assert oracle(corpus_source("encapInsert")) == Counter({"[[0,1,2],[1,0,2],[1,2,0]]": 1})


def test_functions_render_as_placeholder():
    assert oracle(with_main("not")) == Counter({"<function>": 1})


def test_oracle_values_for_other_expression():
    p = load(PRELUDE + "\nmain = 0")
    arity = {f.name: len(f.params) for f in p.functions}
    vals = oracle_values(p, parse_expr("insert 0 [1]", frozenset(), arity))
    assert [render_oracle(v) for v in vals] == ["[0,1]", "[1,0]"]


@pytest.mark.parametrize(
    "body",
    ["let x free in x", "True =:= True", "let xs = 1 : xs in length xs"],
)
def test_outside_scope_is_unsupported(body):
    with pytest.raises(OracleUnsupported):
        oracle(with_main(body))


def test_step_cap_raises_timeout():
    with pytest.raises(OracleTimeout):
        oracle(with_main("loop"), max_steps=1000)


def test_width_cap_raises_timeout():
    with pytest.raises(OracleTimeout):
        oracle(corpus_source("perm4"), max_width=5)


def test_program_without_main():
    with pytest.raises(OracleUnsupported):
        oracle_values(load(PRELUDE))


@pytest.mark.parametrize("case", [c for c in ORACLE_CASES if c.expected is not None or c.count], ids=lambda c: c.name)
def test_oracle_matches_recorded_expectations(case):
    got = oracle(corpus_source(case.name), **case.caps)
    if case.expected is not None:
        assert got == Counter(case.expected)
    if case.count is not None:
        assert sum(got.values()) == case.count


@pytest.mark.parametrize("case", [c for c in ORACLE_CASES if not c.caps], ids=lambda c: c.name)
def test_engine_agrees_with_oracle(case):
    src = corpus_source(case.name)
    assert multiset(src, budget=Budget(max_steps=5 * 10**6)) == oracle(src)
