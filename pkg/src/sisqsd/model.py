"""Logistic birth-death chains: the SIS model and its Verhulst generalisation.

State ``n`` counts infected individuals in a closed population of ``N``.
The birth rate is ``mu * R0 * (1 - n/N) * n`` and the death rate is
``mu * (1 + alpha * n/N) * n``; ``alpha = 0`` is the SIS model. The origin
is absorbing.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Integral, Real

from .numerics import PrecisionContext, to_mpfr


class SingularParameterError(ZeroDivisionError):
    """Raised at the pole ``(N - 1) * R0 == N`` of the K function."""


@dataclass(frozen=True)
class BirthDeathModel:
    """Rate structure of a finite logistic birth-death chain.

    Rates are evaluated on demand at the precision of the supplied (or
    currently active) context rather than cached.
    """

    N: int
    R0: Real
    mu: Real = 1
    alpha: Real = 0

    def __post_init__(self):
        if isinstance(self.N, bool) or not isinstance(self.N, Integral) or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if not self.R0 > 0:
            raise ValueError(f"R0 must be positive, got {self.R0!r}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu!r}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha!r}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def is_sis(self):
        return self.alpha == 0

    def _check_state(self, n):
        if not 0 <= n <= self.N:
            raise IndexError(f"state {n} outside 0..{self.N}")

    def birth_rate(self, n, ctx=None):
        """``lambda_n = mu * R0 * (1 - n/N) * n``."""
        self._check_state(n)
        if ctx is not None:
            with ctx.activate():
                return self._birth(n)
        return self._birth(n)

    def death_rate(self, n, ctx=None):
        """``mu_n = mu * (1 + alpha * n/N) * n``."""
        self._check_state(n)
        if ctx is not None:
            with ctx.activate():
                return self._death(n)
        return self._death(n)

    # the underscored versions assume the caller has activated a context
    def _birth(self, n):
        N = self.N
        return to_mpfr(self.mu) * to_mpfr(self.R0) * (N - n) * n / N

    def _death(self, n):
        mu = to_mpfr(self.mu)
        if self.alpha == 0:
            return mu * n
        return mu * (1 + to_mpfr(self.alpha) * n / self.N) * n

    def rates(self, ctx=None):
        """Birth and death rates for states ``0..N`` as two lists."""
        ctx = ctx or PrecisionContext()
        with ctx.activate():
            return self._rates()

    def _rates(self):
        rng = range(self.N + 1)
        return [self._birth(n) for n in rng], [self._death(n) for n in rng]


def sis_model(N, R0, mu=1):
    return BirthDeathModel(N, R0, mu, 0)


def verhulst_model(N, R0, mu, alpha):
    return BirthDeathModel(N, R0, mu, alpha)


def ovaskainen_r0(N, R0, ctx=None):
    """Map our ``R0`` onto Ovaskainen's parametrisation: ``(N - 1)/N * R0``."""
    if N < 2:
        raise ValueError("ovaskainen_r0 needs N >= 2")
    ctx = ctx or PrecisionContext()
    with ctx.activate():
        return to_mpfr(R0) * (N - 1) / N


def k_function(N, R0, ctx=None):
    """``2 (N-1)^2 R0^2 / (N [(N-1) R0 - N]^2)``.

    Values below one mark the regime in which Ovaskainen's small-``N``
    adjustment is not needed. Diagnostic only; no adjustment is applied.
    """
    if N < 2:
        raise ValueError("k_function needs N >= 2")
    ctx = ctx or PrecisionContext()
    with ctx.activate():
        r0 = to_mpfr(R0)
        gap = (N - 1) * r0 - N
        if gap == 0:
            raise SingularParameterError(f"K is singular at N={N}, R0={R0}")
        return 2 * (N - 1) ** 2 * r0**2 / (N * gap**2)
