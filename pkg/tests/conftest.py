import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reflekt.linalg import FieldSpec  # noqa: E402
from reflekt.quiver import Quiver  # noqa: E402

# filled in by test_acceptance.py, echoed at the end of the run
CRITERIA: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])


@pytest.fixture
def QQ():
    return FieldSpec(0)


@pytest.fixture
def F5():
    return FieldSpec(5)


@pytest.fixture
def A2():
    return Quiver.build(["1", "2"], [("a", "1", "2")])


@pytest.fixture
def A3():
    return Quiver.build(["1", "2", "3"], [("a", "1", "2"), ("b", "2", "3")])


@pytest.fixture
def star2():
    return Quiver.build(["0", "1", "2"], [("a", "0", "1"), ("b", "0", "2")])


@pytest.fixture
def star3():
    return Quiver.build(["0", "1", "2", "3"], [("a", "0", "1"), ("b", "0", "2"), ("c", "0", "3")])
