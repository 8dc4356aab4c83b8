import numpy as np
import pytest

from percept import EmbeddingSet, write_embeddings

_criterion_lines: list[str] = []


def record_criterion(name: str, ok: bool, detail: str) -> None:
    """Collect one pass/fail line per acceptance criterion for the summary."""
    _criterion_lines.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_set(data: np.ndarray, tag: str = "test") -> EmbeddingSet:
    return EmbeddingSet.from_array(np.asarray(data, dtype=np.float32), tag)


@pytest.fixture
def emb_file(tmp_path):
    """Write a float32 array to a temp EMB1 file and return its path."""

    counter = [0]

    def write(data: np.ndarray, tag: str = "test") -> str:
        counter[0] += 1
        path = tmp_path / f"set_{counter[0]}.emb"
        write_embeddings(make_set(data, tag), path)
        return str(path)

    return write
