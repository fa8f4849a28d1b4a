import time

import numpy as np
import pytest

_SESSION = {"start": None, "modules": set()}
ACCEPTANCE_LINES = []


def pytest_sessionstart(session):
    _SESSION["start"] = time.perf_counter()


def pytest_collection_modifyitems(session, config, items):
    _SESSION["modules"] = {item.module.__name__ for item in items if hasattr(item, "module")}
    # The wall-clock criterion measures the whole session, so it runs last.
    last = [i for i in items if i.name == "test_criterion_13_suite_runtime"]
    items[:] = [i for i in items if i not in last] + last


def session_elapsed():
    return time.perf_counter() - _SESSION["start"]


def collected_modules():
    return set(_SESSION["modules"])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
