import pytest

from curvemax.curve_model import CurveParams
from curvemax.multiplier import MultiplierEvaluator
from curvemax.quadrature import QuadratureConfig

# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


def record(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def p211():
    return CurveParams(2.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def evaluator(p211):
    return MultiplierEvaluator(p211, QuadratureConfig())
