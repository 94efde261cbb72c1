import time

import pytest

from helpers import ACCEPTANCE_LINES
from xxladder.rules import generate_rule_table


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rule_timing():
    """Shared slot for the wall-clock cost of building the rule table."""
    return {}


@pytest.fixture(scope="session")
def rules(rule_timing):
    t0 = time.perf_counter()
    table = generate_rule_table()
    rule_timing["seconds"] = time.perf_counter() - t0
    return table
