import numpy as np
import pytest

from otfs_outage.dd_channel import ChannelRealization, GridParams

# acceptance criteria append (label, passed, detail) here; printed in the summary
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid4():
    return GridParams(4, 4)


def make_channel(gains, delays, dopplers):
    return ChannelRealization.from_arrays(gains, delays, dopplers)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
