import pytest

from illiq_arb import fixtures

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def A():
    return fixtures.curve_a()


@pytest.fixture
def B():
    return fixtures.curve_b()


@pytest.fixture
def tree():
    return fixtures.tree_d()


@pytest.fixture
def chain(tree):
    return fixtures.chain_strategy(tree)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
