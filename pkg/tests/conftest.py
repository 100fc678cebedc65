import itertools

import pytest

from sumcode.core import MessageVector


def all_messages(k):
    return [MessageVector(bits) for bits in itertools.product((0, 1), repeat=k)]


@pytest.fixture
def messages():
    return all_messages


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
