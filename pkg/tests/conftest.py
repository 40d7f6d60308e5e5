from pathlib import Path

import pytest

from pfpsat.cnf import CnfFormula, showcase_formula

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def showcase() -> CnfFormula:
    return showcase_formula()


@pytest.fixture
def units3() -> CnfFormula:
    return CnfFormula.from_lists(3, [[1], [2], [3]])


@pytest.fixture
def contradiction() -> CnfFormula:
    return CnfFormula.from_lists(1, [[1], [-1]])


@pytest.fixture
def or2() -> CnfFormula:
    return CnfFormula.from_lists(2, [[1, 2]])


# small satisfiable formulas (n <= 4) used by cross-module checks
SMALL_FORMULAS = [
    (3, [[1], [1, 2], [1, 3]]),
    (3, [[1], [2], [3]]),
    (2, [[1, 2]]),
    (1, [[1]]),
    (3, [[1, -3], [3]]),
    (4, [[1, -2, 3], [-1, 4], [2, 3, -4]]),
    (4, [[1, 2], [-1, -2], [3, 4], [-3, -4]]),
    (4, [[1, 2, 3, 4]]),
    (2, [[1, -1]]),
]


def small_formulas():
    return [CnfFormula.from_lists(n, cl) for n, cl in SMALL_FORMULAS]


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.report_lines():
        terminalreporter.write_line(line)
