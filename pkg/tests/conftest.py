import random
from fractions import Fraction

import pytest

from liesym import fixture_path
from liesym import exprcore as ex
from liesym import detsolve as ds
from liesym import liealg as lg
from liesym.cli import paper_basis as _paper_basis


# one human-readable line per end-to-end criterion, echoed after the run
CRITERION_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(CRITERION_LINES):
            terminalreporter.write_line(CRITERION_LINES[n])


@pytest.fixture(scope="session")
def ode_plus():
    return ds.load_ode(fixture_path("ode_plus.json"))


@pytest.fixture(scope="session")
def ode_minus():
    return ds.load_ode(fixture_path("ode_minus.json"))


@pytest.fixture(scope="session")
def ode_printed():
    return ds.load_ode(fixture_path("ode_printed.json"))


@pytest.fixture(scope="session")
def basis():
    return _paper_basis()


@pytest.fixture(scope="session")
def algebra(basis):
    return lg.structure_constants(basis, labels=("Pi1", "Pi2", "Pi3"))


def rand_expr(rng: random.Random, depth: int) -> ex.Expr:
    """Random expression tree over x, y with rational constants."""
    try:
        return _rand_expr(rng, depth)
    except (ex.DomainError, ex.DivisionByZero):
        # e.g. a constant subtree folded to 0^(-2); just retry
        return rand_expr(rng, depth)


def _rand_expr(rng: random.Random, depth: int) -> ex.Expr:
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.4:
            return ex.num(Fraction(rng.randint(-3, 3), rng.randint(1, 3)))
        return ex.var(rng.choice(("x", "y")))
    op = rng.choice(("add", "add", "mul", "mul", "pow", "exp", "ln"))
    if op == "add":
        return ex.add(_rand_expr(rng, depth - 1), _rand_expr(rng, depth - 1))
    if op == "mul":
        return ex.mul(_rand_expr(rng, depth - 1), _rand_expr(rng, depth - 1))
    if op == "pow":
        return ex.pow_(_rand_expr(rng, depth - 1),
                       ex.num(rng.choice((-2, -1, 2, 3))))
    if op == "exp":
        return ex.exp_(_rand_expr(rng, depth - 1))
    # ln of 2 + t^2: defined at every real sample point
    t = _rand_expr(rng, depth - 1)
    return ex.ln_(ex.add(ex.num(2), ex.mul(t, t)))
