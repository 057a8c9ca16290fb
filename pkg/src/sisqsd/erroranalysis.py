"""Approximation-error metrics and doubling-in-N order classification."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

VERDICTS = ("polynomial_1_over_N", "exponentially_small", "constant", "inconclusive")

# successive-ratio bands for classify_scaling
HALVING_BAND = (Fraction(1, 3), Fraction(2, 3))
CONSTANT_BAND = (Fraction(2, 3), Fraction(3, 2))
SQUARING_BAND = (Fraction(3, 2), Fraction(12, 5))


def _check_pair(qhat, q):
    if len(qhat) != len(q):
        raise ValueError(f"length mismatch: {len(qhat)} vs {len(q)}")


def _as_mpfr(x):
    return x if isinstance(x, mpfr) else mpfr(x)


def _precision(*dists):
    return max(getattr(x, "precision", 53) for d in dists for x in d)


def deviations(qhat, q):
    """``|qhat_i - q_i|`` for every state."""
    _check_pair(qhat, q)
    with gmpy2.context(precision=_precision(qhat, q)):
        return [abs(_as_mpfr(a) - _as_mpfr(b)) for a, b in zip(qhat, q)]


def err1(qhat, q):
    """Largest pointwise deviation, ``max_i |qhat_i - q_i|``."""
    return max(deviations(qhat, q), default=mpfr(0))


def err2(qhat, q):
    """Total variation distance, ``0.5 * sum_i |qhat_i - q_i|``."""
    d = deviations(qhat, q)
    with gmpy2.context(precision=_precision(qhat, q)):
        return gmpy2.fsum(d) / 2


@dataclass(frozen=True)
class ErrorReport:
    approx_name: str
    N: int
    R0: object
    err1: object
    err2: object
    precision_bits: int = 0

    def check(self):
        """Assert the relations every (err1, err2) pair must satisfy."""
        e1, e2 = self.err1, self.err2
        problems = []
        if e1 < 0 or e2 < 0:
            problems.append("negative error")
        if e1 > 2 * e2:
            problems.append("err1 > 2 err2")
        if e2 > self.N * e1 / 2:
            problems.append("err2 > N err1 / 2")
        if e2 > 1:
            problems.append("err2 > 1")
        if problems:
            raise AssertionError(f"{self.approx_name} N={self.N} R0={self.R0}: " + ", ".join(problems))
        return True


def compare(qhat, q, R0=None, precision_bits=0, approx_name=None):
    """ErrorReport for ``qhat`` against the reference ``q``."""
    tag = getattr(q, "model_tag", None)
    return ErrorReport(
        approx_name=approx_name or getattr(qhat, "label", "approx"),
        N=len(q),
        R0=R0 if R0 is not None else (tag.R0 if tag else None),
        err1=err1(qhat, q),
        err2=err2(qhat, q),
        precision_bits=precision_bits,
    )


@dataclass(frozen=True)
class ScalingVerdict:
    approx_name: str
    R0: object
    sampled_N: tuple
    errors: tuple
    verdict: str


def _in_band(x, band):
    lo, hi = band
    return lo.numerator <= x * lo.denominator and x * hi.denominator <= hi.numerator


def classify_scaling(errors, sampled_N, approx_name="", R0=None):
    """Classify how an error sequence behaves as ``N`` doubles.

    With ``r_j = e(2N_j) / e(N_j)``: every ``r_j`` in [1/3, 2/3] means the
    error halves (order ``1/N``); every ``r_j`` in [2/3, 3/2] means it is
    flat; every ``log e(2N_j) / log e(N_j)`` in [3/2, 12/5] with ``e < 1``
    means it squares (exponentially small). Anything else is inconclusive.
    """
    errors = tuple(errors)
    sampled_N = tuple(int(n) for n in sampled_N)
    if len(errors) != len(sampled_N):
        raise ValueError("errors and sampled_N differ in length")
    if len(errors) < 3:
        raise ValueError("need at least three doublings")
    if sampled_N[0] < 1 or any(b != 2 * a for a, b in zip(sampled_N, sampled_N[1:])):
        raise ValueError(f"N values {sampled_N} are not consecutive doublings")
    if any(not e > 0 for e in errors):
        raise ValueError("errors must be positive")

    with gmpy2.context(precision=max(getattr(e, "precision", 53) for e in errors)):
        es = [_as_mpfr(e) for e in errors]
        ratios = [b / a for a, b in zip(es, es[1:])]
        if all(_in_band(r, HALVING_BAND) for r in ratios):
            verdict = "polynomial_1_over_N"
        elif all(_in_band(r, CONSTANT_BAND) for r in ratios):
            verdict = "constant"
        elif all(e < 1 for e in es) and all(
            _in_band(gmpy2.log(b) / gmpy2.log(a), SQUARING_BAND) for a, b in zip(es, es[1:])
        ):
            verdict = "exponentially_small"
        else:
            verdict = "inconclusive"
    return ScalingVerdict(approx_name, R0, sampled_N, errors, verdict)
