import threading
import time

import pytest

from percept import UsageError
from percept.runtime import bounded_ordered_map, resolve_threads


def test_explicit_threads_win(monkeypatch):
    monkeypatch.setenv("PERCEPT_THREADS", "2")
    assert resolve_threads(5) == 5


def test_env_fallback(monkeypatch):
    monkeypatch.setenv("PERCEPT_THREADS", "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(0) == 3


def test_auto_uses_cpu_count(monkeypatch):
    monkeypatch.delenv("PERCEPT_THREADS", raising=False)
    assert resolve_threads(None) >= 1


def test_invalid_env_is_usage_error(monkeypatch):
    monkeypatch.setenv("PERCEPT_THREADS", "many")
    with pytest.raises(UsageError, match="must be an integer"):
        resolve_threads(None)


def test_nonpositive_env_falls_through(monkeypatch):
    monkeypatch.setenv("PERCEPT_THREADS", "0")
    assert resolve_threads(None) >= 1


def test_map_preserves_order_single_thread():
    assert list(bounded_ordered_map(lambda x: x * x, range(10), 1)) == [
        x * x for x in range(10)
    ]


def test_map_preserves_order_multi_thread():
    # Earlier items sleep longer, so completion order inverts submission
    # order; the output order must not.
    def slow_square(x):
        time.sleep((9 - x) * 0.002)
        return x * x

    out = list(bounded_ordered_map(slow_square, range(10), 4))
    assert out == [x * x for x in range(10)]


def test_map_runs_concurrently():
    active = []
    peak = [0]
    lock = threading.Lock()

    def task(x):
        with lock:
            active.append(x)
            peak[0] = max(peak[0], len(active))
        time.sleep(0.02)
        with lock:
            active.remove(x)
        return x

    list(bounded_ordered_map(task, range(8), 4))
    assert peak[0] > 1


def test_map_propagates_exceptions():
    def boom(x):
        if x == 3:
            raise ValueError("item 3")
        return x

    with pytest.raises(ValueError, match="item 3"):
        list(bounded_ordered_map(boom, range(6), 2))


def test_map_bounded_inflight():
    # With inflight=2 the mapper may never have more than 2 unconsumed
    # futures, so at most 2 tasks start before the first result is read.
    started = []

    def task(x):
        started.append(x)
        return x

    gen = bounded_ordered_map(task, range(100), 2, inflight=2)
    first = next(gen)
    assert first == 0
    assert len(started) <= 4
    assert list(gen) == list(range(1, 100))
