"""Command line driver: ``flc run FILE``.

Exit codes: 0 at least one value, 1 no values, 2 static or dynamic error,
3 step budget exhausted, 4 oracle disagreement (with ``--oracle-check``).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .engine import Runtime
from .errors import FlcError, OracleTimeout, OracleUnsupported, StaticError
from .oracle import oracle_enumerate
from .render import render
from .runtime import STAT_KEYS, Stats
from .search import Budget, Strategy, enumerate_tree
from .transform import load

EXIT_VALUES, EXIT_NO_VALUES, EXIT_ERROR, EXIT_BUDGET, EXIT_ORACLE = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    path: str
    strategy: Strategy = field(default_factory=Strategy)
    max_values: Optional[int] = None
    max_steps: Optional[int] = None
    det_opt: bool = True
    stats: bool = False
    oracle_check: bool = False
    stats_out: Optional[str] = None
    explain_det: bool = False

    def __post_init__(self):
        for name in ("max_values", "max_steps"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class RunResult:
    exit_code: int
    values: list[str]
    stats: Optional[Stats] = None
    messages: list[str] = field(default_factory=list)
    status: str = ""


def stats_record(stats: Stats, full: bool = False) -> dict:
    rec = stats.record()
    if full:
        return rec
    return {k: rec[k] for k in STAT_KEYS}


def run_source(source: str, cfg: RunConfig, filename: str = "<input>") -> RunResult:
    msgs: list[str] = []
    try:
        program = load(source)
    except StaticError as exc:
        return RunResult(EXIT_ERROR, [], None, [d.format(filename) for d in exc.diagnostics], "error")
    except FlcError as exc:
        return RunResult(EXIT_ERROR, [], None, [exc.diagnostic().format(filename)], "error")
    if program.main is None:
        return RunResult(EXIT_ERROR, [], None, [f"{filename}:0:0: program has no main"], "error")
    rt = Runtime(program, det_opt=cfg.det_opt)
    if cfg.explain_det:
        msgs.extend(rt.det.explain())
    start = time.perf_counter()
    values: list[str] = []
    stream = enumerate_tree(rt.eval_main(), cfg.strategy, Budget(cfg.max_steps, cfg.max_values), rt.stats)
    try:
        for v in stream:
            values.append(render(v))
    except FlcError as exc:
        rt.stats.wall_time_ms = (time.perf_counter() - start) * 1000
        msgs.append(exc.diagnostic().format(filename))
        return RunResult(EXIT_ERROR, values, rt.snapshot(), msgs, "error")
    rt.stats.wall_time_ms = (time.perf_counter() - start) * 1000
    stats = rt.snapshot()
    if stream.status == "exhausted":
        code = EXIT_BUDGET
        msgs.append(f"{filename}: step budget of {cfg.max_steps} expansions exhausted")
    else:
        code = EXIT_VALUES if values else EXIT_NO_VALUES
    if cfg.oracle_check and stream.status == "complete":
        try:
            expected = oracle_enumerate(program)
        except (OracleTimeout, OracleUnsupported) as exc:
            msgs.append(f"{filename}: oracle check skipped: {exc.message}")
        else:
            if expected != Counter(values):
                msgs.append(f"{filename}: oracle disagrees: expected {sorted(expected.elements())}")
                code = EXIT_ORACLE
            else:
                msgs.append(f"{filename}: oracle agrees ({sum(expected.values())} values)")
    return RunResult(code, values, stats, msgs, stream.status)


def run_program(cfg: RunConfig) -> RunResult:
    try:
        source = Path(cfg.path).read_text(encoding="utf-8")
    except OSError as exc:
        return RunResult(EXIT_ERROR, [], None, [f"{cfg.path}: {exc.strerror}"], "error")
    return run_source(source, cfg, cfg.path)


def parse_strategy(text: str) -> Strategy:
    """``dfs``, ``bfs``, ``fair``, ``ids`` or ``ids:DEPTH:GROWTH``."""
    parts = text.split(":")
    if len(parts) not in (1, 3) or (len(parts) == 3 and parts[0] != "ids"):
        raise argparse.ArgumentTypeError(f"bad strategy {text!r}")
    try:
        if len(parts) == 3:
            return Strategy("ids", int(parts[1]), int(parts[2]))
        return Strategy(parts[0])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flc", description="Functional-logic kernel interpreter")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="evaluate main and print its values")
    run.add_argument("file")
    run.add_argument("--strategy", type=parse_strategy, default=Strategy("dfs"), help="dfs|bfs|ids|fair")
    run.add_argument("-n", dest="max_values", type=_positive, help="stop after K values")
    run.add_argument("--max-steps", type=_positive, help="expansion step budget")
    run.add_argument("--no-det-opt", dest="det_opt", action="store_false", help="disable the fast path")
    run.add_argument("--stats", action="store_true", help="print counters as JSON on stderr")
    run.add_argument("--stats-out", help="write counters as JSON to this file")
    run.add_argument("--oracle-check", action="store_true", help="compare with the eager oracle")
    run.add_argument("--explain-det", action="store_true", help="print determinism flags on stderr")
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        path=args.file,
        strategy=args.strategy,
        max_values=args.max_values,
        max_steps=args.max_steps,
        det_opt=args.det_opt,
        stats=args.stats,
        oracle_check=args.oracle_check,
        stats_out=args.stats_out,
        explain_det=args.explain_det,
    )
    res = run_program(cfg)
    for line in res.values:
        print(line)
    sys.stdout.flush()
    for m in res.messages:
        print(m, file=sys.stderr)
    if res.stats is not None:
        doc = json.dumps(stats_record(res.stats))
        if cfg.stats:
            print(doc, file=sys.stderr)
        if cfg.stats_out:
            Path(cfg.stats_out).write_text(doc + "\n", encoding="utf-8")
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
