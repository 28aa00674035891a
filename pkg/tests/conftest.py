import random
from fractions import Fraction
from itertools import product

import pytest

from sdgkit.weil import monomial_to_exponents


@pytest.fixture
def rng():
    return random.Random(20240613)


def dense(x):
    """Exponent-vector dictionary of a Weil element with Fraction coefficients."""
    k = x.alg.k
    return {monomial_to_exponents(m, k): Fraction(int(c.numerator), int(c.denominator)) for m, c in x.items()}


def dense_mul(a, b, k, cap, forbidden=()):
    """Reference product on exponent dictionaries: multiply, then drop truncated monomials."""
    out = {}
    for (ea, ca), (eb, cb) in product(a.items(), b.items()):
        e = tuple(x + y for x, y in zip(ea, eb))
        if sum(e) >= cap:
            continue
        if any((e[i] >= 2) if i == j else (e[i] and e[j]) for i, j in forbidden):
            continue
        out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c}


# -- acceptance summary: one line per criterion ----------------------------------------

ACCEPTANCE: dict = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion under the given number."""
    holder = {}

    def register(number, title):
        holder["key"] = (number, title)

    yield register
    key = holder.get("key")
    if key is not None:
        rep = getattr(request.node, "rep_call", None)
        ACCEPTANCE[key] = bool(rep and rep.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), ok in sorted(ACCEPTANCE.items()):
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}")
