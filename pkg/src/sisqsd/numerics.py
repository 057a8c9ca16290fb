"""Working-precision contract and accurate summation.

All arithmetic in this package runs on MPFR binary floats through gmpy2.
A :class:`PrecisionContext` is passed explicitly to every numerical entry
point and activated only for the duration of that call, so nothing relies on
a process-wide precision setting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

MIN_BITS = 64
DEFAULT_BITS = 256


class PrecisionError(ArithmeticError):
    """Raised when the working precision or exponent range is inadequate."""


_TINY = gmpy2.mul_2exp(mpfr(1), gmpy2.get_context().emin)


def _pow2(exponent):
    # exact power of two, independent of the active precision
    return gmpy2.mul_2exp(mpfr(1), exponent)


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision plus the tolerances derived from it.

    Parameters
    ----------
    significand_bits : int
        MPFR precision used for every arithmetic operation.
    fixed_point_tol : mpfr, optional
        Relative convergence tolerance for the iterative QSD solvers.
        Defaults to ``2**-(significand_bits // 2)``.
    equality_tol : mpfr, optional
        Relative tolerance used when two computations of the same quantity
        are cross-checked. Defaults to ``2**-(significand_bits - 32)``.
    """

    significand_bits: int = DEFAULT_BITS
    fixed_point_tol: object = field(default=None)
    equality_tol: object = field(default=None)

    def __post_init__(self):
        bits = self.significand_bits
        if not isinstance(bits, int) or bits < MIN_BITS:
            raise ValueError(f"significand_bits must be an integer >= {MIN_BITS}, got {bits!r}")
        if self.fixed_point_tol is None:
            object.__setattr__(self, "fixed_point_tol", _pow2(-(bits // 2)))
        if self.equality_tol is None:
            object.__setattr__(self, "equality_tol", _pow2(-(bits - 32)))
        fp = to_mpfr(self.fixed_point_tol)
        eq = to_mpfr(self.equality_tol)
        object.__setattr__(self, "fixed_point_tol", fp)
        object.__setattr__(self, "equality_tol", eq)
        if not 0 < fp < 1 or not 0 < eq < 1:
            raise ValueError("tolerances must lie strictly between 0 and 1")
        if fp < _pow2(-bits + 8):
            raise ValueError(
                f"fixed_point_tol={float(fp):.3g} is below 2**-(bits-8); "
                "raise significand_bits or loosen the tolerance"
            )

    def activate(self):
        """Return a gmpy2 context manager running at this precision."""
        return gmpy2.context(precision=self.significand_bits)


def default_context(N, R0):
    """Pick a precision with enough headroom for a given ``(N, R0)`` cell.

    The QSD above threshold spans factorial-sized dynamic range and the
    approximation errors of interest are far below double precision, so the
    bit count grows linearly with ``N``.
    """
    r0 = float(R0)
    spread = max(r0, 1.0 / r0, 2.0)
    bits = max(DEFAULT_BITS, math.ceil(3.5 * N * math.log2(spread)))
    return PrecisionContext(bits)


def to_mpfr(x):
    """Convert a Python number to an mpfr at the active precision.

    Floats are read through their shortest decimal repr, so ``0.1`` means
    one tenth rather than the nearest double.
    """
    if isinstance(x, float):
        return mpfr(repr(x))
    if isinstance(x, Fraction):
        return mpfr(x.numerator) / x.denominator
    if isinstance(x, Decimal):
        return mpfr(str(x))
    return mpfr(x)


def stable_sum(values, ctx=None):
    """Correctly rounded sum of ``values`` (MPFR ``mpfr_sum``).

    Raises :class:`PrecisionError` if the finite inputs overflow the exponent
    range.
    """
    ctx = ctx or PrecisionContext()
    with ctx.activate():
        terms = [v if isinstance(v, mpfr) else to_mpfr(v) for v in values]
        if not terms:
            return mpfr(0)
        total = gmpy2.fsum(terms)
        if not gmpy2.is_finite(total) and all(gmpy2.is_finite(t) for t in terms):
            raise PrecisionError("summation overflowed the exponent range")
        return total


def rel_diff(a, b):
    """``|a - b| / max(|a|, |b|, tiny)``; symmetric and zero for ``a == b``."""
    a = a if isinstance(a, mpfr) else to_mpfr(a)
    b = b if isinstance(b, mpfr) else to_mpfr(b)
    if a == b:
        return mpfr(0)
    scale = max(abs(a), abs(b), _TINY)
    return abs(a - b) / scale


def to_decimal(x, digits=40):
    """Exact-enough decimal image of an mpfr for display and rounding."""
    if not isinstance(x, mpfr):
        x = to_mpfr(x)
    if x == 0:
        return Decimal(0)
    mant, exp, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    return Decimal(f"{sign}0.{mant}E{exp}")
