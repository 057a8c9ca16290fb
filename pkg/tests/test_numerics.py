import math
import random

import gmpy2
import pytest
from decimal import Decimal
from gmpy2 import mpfr
from hypothesis import given, settings
from hypothesis import strategies as st

from sisqsd.numerics import (
    PrecisionContext,
    PrecisionError,
    default_context,
    rel_diff,
    stable_sum,
    to_decimal,
    to_mpfr,
)


def test_default_context_examples():
    assert default_context(100, 10).significand_bits >= 1163
    assert default_context(2, 2).significand_bits == 256
    ctx = default_context(50, 5)
    assert ctx.significand_bits >= 64
    assert ctx.fixed_point_tol == gmpy2.mul_2exp(mpfr(1), -(ctx.significand_bits // 2))


def test_default_context_covers_table_one_resolution():
    # errors near 1e-61 must sit far above the working epsilon
    ctx = default_context(100, 10)
    assert ctx.significand_bits > math.log2(10**61) + 200


def test_context_invariants():
    with pytest.raises(ValueError):
        PrecisionContext(32)
    with pytest.raises(ValueError):
        PrecisionContext(128, fixed_point_tol=2.0)
    with pytest.raises(ValueError):
        PrecisionContext(128, fixed_point_tol=gmpy2.mul_2exp(mpfr(1), -125))
    PrecisionContext(128, fixed_point_tol=gmpy2.mul_2exp(mpfr(1), -120))


def test_context_scoped_not_global():
    before = gmpy2.get_context().precision
    stable_sum([1, 2], PrecisionContext(500))
    assert gmpy2.get_context().precision == before


def test_stable_sum_examples():
    ctx = PrecisionContext(256)
    assert stable_sum([], ctx) == 0
    assert stable_sum([1, 1, 1], ctx) == 3
    with ctx.activate():
        big = mpfr(10) ** 40
        values = [big, 1, -big]
    assert stable_sum(values, ctx) == 1


def test_stable_sum_beats_naive_at_low_precision():
    ctx = PrecisionContext(64)
    with ctx.activate():
        big = mpfr(2) ** 100
        values = [big, mpfr(1), -big] * 5
        naive = sum(values, mpfr(0))
    assert naive != 5
    assert stable_sum(values, ctx) == 5


def test_stable_sum_overflow():
    ctx = PrecisionContext(64)
    with gmpy2.context(precision=64):
        huge = gmpy2.next_below(mpfr("inf"))
    with pytest.raises(PrecisionError):
        stable_sum([huge, huge], ctx)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e30, 1e30, allow_nan=False), max_size=30), st.randoms())
def test_stable_sum_permutation_invariant(values, rnd):
    ctx = PrecisionContext(128)
    shuffled = list(values)
    rnd.shuffle(shuffled)
    a, b = stable_sum(values, ctx), stable_sum(shuffled, ctx)
    assert a == b  # correctly rounded, so exactly equal


def test_rel_diff_examples():
    assert rel_diff(5, 5) == 0
    assert rel_diff(0, 0) == 0
    assert rel_diff(1, 2) == 0.5


@settings(max_examples=100, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False), st.floats(allow_nan=False, allow_infinity=False))
def test_rel_diff_symmetric(a, b):
    assert rel_diff(a, b) == rel_diff(b, a)
    assert rel_diff(a, a) == 0
    assert 0 <= rel_diff(a, b) <= 2


def test_to_mpfr_reads_decimal():
    with gmpy2.context(precision=200):
        assert to_mpfr(0.1) == mpfr("0.1")
        assert to_mpfr(0.1) != mpfr(0.1)


def test_to_decimal_round_trip():
    assert to_decimal(mpfr("0.5")) == Decimal("0.5")
    with gmpy2.context(precision=300):
        x = mpfr("4.6e-61")
    assert abs(float(to_decimal(x)) - 4.6e-61) < 1e-75
    assert to_decimal(0) == 0
    rnd = random.Random(3)
    for _ in range(20):
        v = rnd.uniform(-1e5, 1e5)
        assert math.isclose(float(to_decimal(v)), v, rel_tol=1e-15)
