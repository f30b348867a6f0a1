"""Run deeply recursive host code on a thread with a large stack.

The deterministic fast path and the oracle are written as ordinary recursive
Python. The main thread's C stack is too small for the recursion depths they
reach, so calls are handed to one long-lived worker with a big stack.
"""

from __future__ import annotations

import queue
import sys
import threading

STACK_BYTES = 512 * 1024 * 1024
_limit = 20_000

_lock = threading.Lock()
_jobs: "queue.SimpleQueue" = queue.SimpleQueue()
_worker: threading.Thread | None = None


def _serve() -> None:
    while True:
        fn, args, box, done = _jobs.get()
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(_limit)
        try:
            box.append((True, fn(*args)))
        except BaseException as exc:  # handed back to the caller
            box.append((False, exc))
        finally:
            sys.setrecursionlimit(old)
            done.set()


def _start() -> threading.Thread:
    global _worker, _limit
    with _lock:
        if _worker is None:
            old = threading.stack_size()
            for size in (STACK_BYTES, STACK_BYTES // 4, 32 * 1024 * 1024):
                try:
                    threading.stack_size(size)
                    _limit = size // 4096
                    break
                except (ValueError, RuntimeError):
                    continue
            try:
                t = threading.Thread(target=_serve, name="flc-deep", daemon=True)
                t.start()
            finally:
                threading.stack_size(old)
            _worker = t
    return _worker


def deep_call(fn, *args):
    """Call ``fn(*args)`` on the big-stack worker and return its result."""
    worker = _worker or _start()
    if threading.current_thread() is worker:
        return fn(*args)
    box: list = []
    done = threading.Event()
    _jobs.put((fn, args, box, done))
    done.wait()
    ok, val = box[0]
    if ok:
        return val
    raise val
