import random

import pytest
from hypothesis import settings

from singular_ff.exterior import KMatrix
from singular_ff.gf import FieldSpec
from singular_ff.laurent import LaurentElement
from singular_ff.lattice import PolyLattice

settings.register_profile("repo", deadline=None, derandomize=True)
settings.load_profile("repo")

FIELD_SIZES = (2, 3, 4, 5, 7, 8, 9, 16)


@pytest.fixture(params=FIELD_SIZES, ids=lambda q: f"q{q}")
def field(request):
    return FieldSpec.from_q(request.param)


def random_T_poly(F, rng, deg):
    return LaurentElement.from_T_poly(F, [rng.randrange(F.q) for _ in range(deg + 1)])


def random_lattice(F, d, deg, rng):
    """Lattice with a nonsingular basis of T-polynomials of degree <= deg."""
    while True:
        B = KMatrix(F, [[random_T_poly(F, rng, deg) for _ in range(d)] for _ in range(d)])
        if B.det().is_nonzero():
            return PolyLattice(B)


@pytest.fixture
def rng():
    return random.Random(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
