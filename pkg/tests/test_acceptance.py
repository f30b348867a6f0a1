"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

The lines are printed as the tests run (visible with ``-s``) and repeated in
the terminal summary under "acceptance criteria".
"""

from __future__ import annotations

import time
from collections import Counter
from itertools import product

import pytest

from flc.oracle import oracle_enumerate
from flc.search import BFS, DFS, FAIR, IDS, Budget, Strategy
from flc.transform import load

import test_properties
import test_search
from conftest import ACCEPTANCE_LINES, corpus_source, multiset, run_src
from corpus_cases import BY_NAME, ORACLE_CASES, TERMINATING


class Check:
    """Collects sub-checks for one criterion and reports them on one line."""

    def __init__(self, name: str):
        self.name = name
        self.failures: list[str] = []
        self.notes: list[str] = []

    def expect(self, ok: bool, what: str) -> None:
        (self.notes if ok else self.failures).append(what)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None:
            self.failures.append(f"{exc_type.__name__}: {exc}")
        status = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.failures or self.notes)
        line = f"{status} {self.name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        if self.failures and exc is None:
            pytest.fail(line)
        return False


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_call_time_choice():
    with Check("call-time choice (xorSelf)") as c:
        src = corpus_source("xorSelf")
        for s in (DFS, BFS, IDS, FAIR, Strategy("ids", 2, 3)):
            got, dt = timed(lambda: multiset(src, strategy=s))
            c.expect(got == Counter({"False": 2}), f"{s.kind} {dict(got)}")
            c.expect(dt < 1.0, f"{s.kind} {dt:.3f}s < 1s")


def test_nested_sharing():
    with Check("nested sharing (notIf)") as c:
        got, dt = timed(lambda: multiset(corpus_source("notIf")))
        c.expect(got == Counter({"True": 1, "False": 1}), f"values {dict(got)}")
        c.expect(dt < 1.0, f"{dt:.3f}s < 1s")


def test_memoization_ratio():
    with Check("memoization ratio (addNum5 vs addNum10)") as c:
        _, rt5, _ = run_src(corpus_source("addNum5"))
        _, rt10, _ = run_src(corpus_source("addNum10"))
        e5, e10 = rt5.stats.evaluations_by_label["x"], rt10.stats.evaluations_by_label["x"]
        c.expect(e5 == e10, f"evaluations of x {e5} == {e10}")
        ratio = rt10.stats.engine_steps / rt5.stats.engine_steps
        c.expect(ratio <= 2.0 * 1.1, f"engine steps ratio {ratio:.3f} <= 2.2")


def test_sharing_across_nondeterminism():
    with Check("sharing across non-determinism") as c:
        vy, rty, _ = run_src(corpus_source("yesSharingND"))
        vn, rtn, _ = run_src(corpus_source("noSharingND"))
        c.expect(vy == vn == ["409", "409"], f"values {vy} {vn}")
        yes, no = rty.stats.calls_by_function["prime80"], rtn.stats.calls_by_function["prime80"]
        c.expect(yes == 1, f"yesSharingND calls {yes} == 1")
        c.expect(no == 2, f"noSharingND calls {no} == 2")
        shared = rty.stats.evaluations_by_label["p"]
        c.expect(shared == 1, f"thunk p evaluated {shared} == 1")


def test_fair_search():
    with Check("fair search (sometimesLoops)") as c:
        budget = Budget(max_steps=10**5)
        src = corpus_source("sometimesLoops")
        (fair, _, fs), dt_fair = timed(lambda: run_src(src, strategy=FAIR, budget=budget))
        (dfs, _, ds), dt_dfs = timed(lambda: run_src(src, strategy=DFS, budget=budget))
        c.expect(fair == ["True"], f"fair values {fair}")
        c.expect(dfs == [] and ds.status == "exhausted", f"dfs values {dfs}, {ds.status}")
        c.expect(dt_fair < 5.0 and dt_dfs < 5.0, f"fair {dt_fair:.2f}s, dfs {dt_dfs:.2f}s < 5s")


def test_oracle_equivalence():
    with Check("oracle equivalence over the terminating corpus") as c:
        budget = Budget(max_steps=5 * 10**6)
        agreed = 0
        for case in ORACLE_CASES:
            src = corpus_source(case.name)
            engine = multiset(src, budget=budget)
            oracle = oracle_enumerate(load(src), **case.caps)
            if engine == oracle:
                agreed += 1
            else:
                c.expect(False, f"{case.name}: engine {dict(engine)} oracle {dict(oracle)}")
        c.expect(agreed >= 15, f"{agreed}/{len(ORACLE_CASES)} programs agree")
        perm = oracle_enumerate(load(corpus_source("perm4")))
        c.expect(sum(perm.values()) == 24 and len(perm) == 24, "perm4 has 24 values")
        sort8 = multiset(corpus_source("permSort8"), budget=budget)
        c.expect(sort8 == Counter({"[1,2,3,4,5,6,7,8]": 1}), "permSort8 sorted")
        last = multiset(corpus_source("lastUnify"))
        twin = oracle_enumerate(load(corpus_source("lastGen")))
        c.expect(last == twin == Counter({"3": 1}), f"last via unification {dict(last)}, oracle twin {dict(twin)}")


def test_unification_economy():
    with Check("unification economy") as c:
        values, rt, _ = run_src(corpus_source("unifyVars"))
        c.expect(values == ["True"], f"values {values}")
        n = rt.stats.narrow_instantiations
        c.expect(n == 0, f"narrow_instantiations {n} == 0")


def test_det_opt_transparency_and_effect():
    with Check("det-opt transparency and effect") as c:
        budget = Budget(max_steps=5 * 10**6)
        same = 0
        for case in TERMINATING:
            src = corpus_source(case.name)
            on, off = multiset(src, budget=budget), multiset(src, det_opt=False, budget=budget)
            if on == off:
                same += 1
            else:
                c.expect(False, f"{case.name} differs")
        c.expect(same == len(TERMINATING), f"{same}/{len(TERMINATING)} identical")
        src = corpus_source("naiveReverse")
        expected = list(Counter(BY_NAME["naiveReverse"].expected))
        (v_on, rt_on, _), t_on = timed(lambda: run_src(src, det_opt=True))
        (v_off, _, _), t_off = timed(lambda: run_src(src, det_opt=False))
        c.expect(v_on == v_off == expected, "naiveReverse values")
        ids, allocs = rt_on.fresh_ids_drawn(), rt_on.stats.shared_thunk_allocations
        c.expect(ids == 0 and allocs == 0, f"fresh_ids_drawn {ids}, shared_thunk_allocations {allocs}")
        c.expect(t_on <= 0.5 * t_off, f"time ratio {t_on / t_off:.3f} <= 0.5")


def peano(text: str) -> int:
    return text.count("S")


def brute_force_queens(n: int) -> set[tuple[int, ...]]:
    """Every placement of one queen per row, kept when no two attack."""
    out = set()
    for cols in product(range(1, n + 1), repeat=n):
        ok = all(
            cols[i] != cols[j] and abs(cols[i] - cols[j]) != j - i for i in range(n) for j in range(i + 1, n)
        )
        if ok:
            out.add(cols)
    return out


def test_six_queens():
    with Check("6-queens") as c:
        (values, _, _), dt = timed(lambda: run_src(corpus_source("queens6"), budget=Budget(max_steps=5 * 10**6)))
        got = {tuple(peano(x) for x in v[1:-1].split(",")) for v in values}
        expected = brute_force_queens(6)
        c.expect(len(values) == 4, f"{len(values)} solutions")
        c.expect(got == expected and len(expected) == 4, "solutions match brute force over 6^6 placements")
        c.expect(dt < 30.0, f"{dt:.2f}s < 30s")


PROPERTY_SUITES = [
    ("at-most-one-valid memo entry", test_properties.test_at_most_one_valid_memo_entry_per_leaf, 200),
    ("branch isolation of bindings", test_properties.test_free_variable_bindings_are_branch_local, 200),
    ("normal-form thunk-freeness", test_properties.test_normal_forms_hold_no_thunks, 150),
    ("engine against oracle", test_properties.test_engine_matches_oracle, 300),
    ("dfs leaf order", test_search.test_dfs_order_is_left_to_right_leaf_sequence, 1000),
    ("ids no duplication", test_search.test_ids_emits_each_leaf_once, 1000),
]


def test_property_suites():
    with Check("property suites") as c:
        cases = 0
        for name, fn, n in PROPERTY_SUITES:
            try:
                fn()
            except Exception as exc:  # report, then fail below
                c.expect(False, f"{name}: {type(exc).__name__}")
            else:
                cases += n
        for k in range(16):
            test_search.test_fairness_witness_family(k)
        cases += 16
        c.expect(cases >= 1000, f"{cases} randomized cases across {len(PROPERTY_SUITES) + 1} suites")
