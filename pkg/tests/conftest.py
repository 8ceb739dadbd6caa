import numpy as np
import pytest

from anomaly_forge.models import TimeWindow

ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def unit_window():
    return TimeWindow(0.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, title, detail = results[number]
        terminalreporter.write_line(
            f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})"
        )
