"""Thread-count resolution and deterministic parallel mapping helpers.

Every parallel loop in this package runs through ``bounded_ordered_map`` so
that results are always consumed in submission order: the output of any
operation is bitwise independent of the worker count.
"""

import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "PERCEPT_THREADS"


def resolve_threads(requested: int | None = None) -> int:
    """Resolve an effective worker count.

    Order of precedence: explicit positive ``requested``, the PERCEPT_THREADS
    environment variable, then ``os.cpu_count()``. A value of 0 or None means
    "auto".
    """
    if requested is not None and requested > 0:
        return int(requested)
    env = os.environ.get(ENV_THREADS, "").strip()
    if env:
        try:
            val = int(env)
        except ValueError:
            from .errors import UsageError

            raise UsageError(f"{ENV_THREADS} must be an integer, got {env!r}")
        if val > 0:
            return val
    return max(1, os.cpu_count() or 1)


def bounded_ordered_map(fn, items, threads: int, inflight: int | None = None):
    """Apply ``fn`` over ``items`` with up to ``threads`` workers.

    Yields results in input order. At most ``inflight`` futures exist at a
    time (default ``2 * threads``), which bounds the memory held by pending
    block results. With ``threads == 1`` this degrades to a plain map.
    """
    items = iter(items)
    if threads <= 1:
        for item in items:
            yield fn(item)
        return
    if inflight is None:
        inflight = 2 * threads
    with ThreadPoolExecutor(max_workers=threads) as pool:
        pending: deque = deque()
        for item in items:
            pending.append(pool.submit(fn, item))
            if len(pending) >= inflight:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()
