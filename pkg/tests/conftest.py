from __future__ import annotations

import os
from collections import Counter
from pathlib import Path

from hypothesis import settings

from flc.engine import Computation, Runtime
from flc.parser import parse_expr
from flc.render import render
from flc.search import DFS, Budget, Strategy, enumerate_tree
from flc.transform import load

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

settings.register_profile("default", deadline=None)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

PRELUDE = """
data Bool = False | True
data List a = Nil | Cons a (List a)
data Pair a b = Pair a b
not x = case x of { False -> True; True -> False }
id x = x
const a b = a
append xs ys = case xs of { [] -> ys; z:zs -> z : append zs ys }
insert x xs = case xs of { [] -> [x]; y:ys -> x : y : ys ? y : insert x ys }
perm xs = case xs of { [] -> []; y:ys -> insert y (perm ys) }
length xs = case xs of { [] -> 0; _:ys -> 1 + length ys }
loop = loop
"""


def corpus_source(name: str) -> str:
    return (CORPUS / f"{name}.flc").read_text()


def run_src(src: str, strategy: Strategy = DFS, det_opt: bool = True, budget: Budget = Budget(), **kw):
    """Rendered values of main, plus the runtime and the stream."""
    rt = Runtime(load(src), det_opt=det_opt, **kw)
    stream = enumerate_tree(rt.eval_main(), strategy, budget, rt.stats)
    values = [render(v) for v in stream]
    return values, rt, stream


def values_of(src: str, **kw) -> list[str]:
    return run_src(src, **kw)[0]


def multiset(src: str, **kw) -> Counter:
    return Counter(values_of(src, **kw))


def with_main(body: str, prelude: str = PRELUDE) -> str:
    return f"{prelude}\nmain = {body}\n"


def expr_in(rt: Runtime, text: str, env=None) -> Computation:
    """A computation for ``text`` over the runtime's program."""
    env = env or {}
    arity = {f.name: len(f.params) for f in rt.program.functions}
    return Computation(parse_expr(text, frozenset(env), arity), env)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
