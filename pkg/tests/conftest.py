import pytest

from mcshoot import Nonlinearity, Problem, RegularizedOperator, WeightFunction, solve_approx
from mcshoot.limit import compute_limit
from mcshoot.regularization import dyadic_ladder

# filled by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def unit():
    return WeightFunction.constant(1.0)


@pytest.fixture(scope="session")
def cubic():
    """f(s) = -s + s^3, u0 = 1, F(s) = (s^2 - 1)^2 / 4."""
    return Nonlinearity.prototype(1.0, 3)


@pytest.fixture(scope="session")
def classical_problem(unit):
    return Problem(unit, Nonlinearity.prototype(1.5, 11))


@pytest.fixture(scope="session")
def jump_problem(unit):
    return Problem(unit, Nonlinearity.prototype(2.5, 11))


@pytest.fixture(scope="session")
def approx_n8(classical_problem):
    return solve_approx(RegularizedOperator(8), classical_problem, 1)


@pytest.fixture(scope="session")
def classical_limit(classical_problem):
    return compute_limit(classical_problem, 1, "below", dyadic_ladder(), early_stop=False)


@pytest.fixture(scope="session")
def jump_limit(jump_problem):
    # the default ladder ends at 1024, where the off-window agreement is still
    # about 5e-6; three more rungs bring it below the 1e-6 limit tolerance
    return compute_limit(jump_problem, 1, "below", dyadic_ladder(13))
