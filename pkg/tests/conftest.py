import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))  # make oracles importable

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

# one line per acceptance criterion, echoed after the run so the
# pass/fail summary survives output capture
_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    def emit(num: int, ok: bool, detail: str) -> None:
        line = f"[acceptance] {num:>2} {'PASS' if ok else 'FAIL'} {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def data_dir() -> str:
    return DATA_DIR


@pytest.fixture(scope="session")
def mt_reference_first1000() -> list[int]:
    path = os.path.join(DATA_DIR, "mt19937_seed5489_first1000.txt")
    with open(path) as fh:
        return [int(line) for line in fh]


@pytest.fixture(scope="session")
def mt_reference_after_1e6() -> list[int]:
    path = os.path.join(DATA_DIR, "mt19937_seed5489_after1e6_next10.txt")
    with open(path) as fh:
        return [int(line) for line in fh]
