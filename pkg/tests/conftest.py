"""Session fixtures and the acceptance-criterion reporting hook."""

from __future__ import annotations

import contextlib
import time

import pytest

from mixroad import Evaluator, bundled_scenario_path, exhaustive_search, load_scenario

# Bit strings for the six reference build schemes, candidate pairs in
# (min id, max id) lexicographic order:
# (1,2) (1,4) (1,5) (2,3) (2,5) (3,4) (3,5) (4,5)
SCHEME_BITS = {
    1: "00000000",
    2: "00000100",
    3: "10010100",
    4: "00101111",
    5: "10101111",
    6: "11111111",
}

SCHEME_COSTS_MUSD = {1: 0.0, 2: 32.5, 3: 97.5, 4: 147.5, 5: 180.0, 6: 242.5}

BUDGETS_MUSD = (0.0, 50.0, 100.0, 150.0, 200.0, 250.0)


@pytest.fixture(scope="session")
def case_study():
    return load_scenario(bundled_scenario_path("yokohama5"))


@pytest.fixture(scope="session")
def case_study_b():
    return load_scenario(bundled_scenario_path("yokohama5_demand_b"))


@pytest.fixture(scope="session")
def evaluator_a(case_study):
    return Evaluator(case_study)


@pytest.fixture(scope="session")
def evaluator_b(case_study_b):
    return Evaluator(case_study_b)


@pytest.fixture(scope="session")
def exhaustive_a(evaluator_a):
    """Unconstrained full enumeration plus its wall-clock time."""
    t0 = time.perf_counter()
    table = exhaustive_search(evaluator_a)
    return table, time.perf_counter() - t0


@pytest.fixture(scope="session")
def exhaustive_b(evaluator_b):
    t0 = time.perf_counter()
    table = exhaustive_search(evaluator_b)
    return table, time.perf_counter() - t0


# -- acceptance criterion reporting -------------------------------------

_CRITERION_LINES: list[str] = []


@contextlib.contextmanager
def criterion(num: int, text: str):
    """Record a PASS/FAIL line for the terminal summary, then re-raise."""
    try:
        yield
    except BaseException:
        _CRITERION_LINES.append(f"criterion {num} FAIL - {text}")
        raise
    _CRITERION_LINES.append(f"criterion {num} PASS - {text}")


def note(line: str) -> None:
    _CRITERION_LINES.append(f"    {line}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _CRITERION_LINES:
        terminalreporter.write_line(line)
