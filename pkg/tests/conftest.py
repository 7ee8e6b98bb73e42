import os

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def sweep_seed():
    raw = os.environ.get("CLEBSCH_SEED", "").strip()
    return int(raw) if raw else 20240611


@pytest.fixture
def rng():
    return np.random.default_rng(sweep_seed())


# acceptance report: one line per criterion, printed at the end of the session
_CRITERIA = []


@pytest.fixture
def criterion():
    def record(number, title, passed, detail):
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        _CRITERIA.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
