from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpfr

from sisqsd.numerics import PrecisionContext


@pytest.fixture
def ctx():
    return PrecisionContext(256)


def _exact(x):
    if isinstance(x, Fraction):
        return mpfr(x.numerator) / x.denominator
    return x if isinstance(x, mpfr) else mpfr(x)


def close(a, b, tol, bits=None):
    """``|a - b| <= tol * max(|a|, |b|)`` evaluated at high precision."""
    prec = bits or max(getattr(a, "precision", 0), getattr(b, "precision", 0), 256)
    with gmpy2.context(precision=prec):
        a, b = _exact(a), _exact(b)
        if a == b:
            return True
        return abs(a - b) <= tol * max(abs(a), abs(b))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
