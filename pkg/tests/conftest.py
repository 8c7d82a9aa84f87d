import pytest

from dssurv.data import SurvivalDataset, build_cumulative_matrix

# four listed failure times plus six later failures, m = 10
EXAMPLE_A_FAILURES = [10, 30, 55, 100, 150, 160, 170, 180, 190, 200]


@pytest.fixture
def example_a():
    return SurvivalDataset.from_lists(EXAMPLE_A_FAILURES)


@pytest.fixture
def example_b():
    """Example A with the largest failure replaced by an LTF at time 50."""
    return SurvivalDataset.from_lists(EXAMPLE_A_FAILURES[:-1], [50])


@pytest.fixture
def matrix_a(example_a):
    return build_cumulative_matrix(example_a)


@pytest.fixture
def matrix_b(example_b):
    return build_cumulative_matrix(example_b)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
