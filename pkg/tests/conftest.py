import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from zpdalg.algebra import direct_product, mat, polynomial_quotient, tri, trunc  # noqa: E402
from zpdalg.exactlinalg import GF2, Field  # noqa: E402

GF3 = Field.gf(3)
QQ = Field.rational()


def f2_cubed():
    one = mat(1, GF2)
    return direct_product(direct_product(one, one), one)


# Small algebras over finite fields, all cheap to enumerate exhaustively.
SMALL = {
    "mat1_gf2": lambda: mat(1, GF2),
    "mat2_gf2": lambda: mat(2, GF2),
    "mat2_gf3": lambda: mat(2, GF3),
    "tri2_gf2": lambda: tri(2, GF2),
    "tri3_gf2": lambda: tri(3, GF2),
    "trunc2_gf2": lambda: trunc(2, GF2),
    "trunc2_gf3": lambda: trunc(2, GF3),
    "trunc3_gf3": lambda: trunc(3, GF3),
    "gf2_cubed": f2_cubed,
    "gf4_over_gf2": lambda: polynomial_quotient([1, 1], GF2),
}


@pytest.fixture(params=sorted(SMALL))
def small_algebra(request):
    return SMALL[request.param]()


REPO = Path(__file__).resolve().parent.parent
ALGEBRA_DIR = REPO / "algebras"


# criterion number -> (title, passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")
