"""Closed-form approximations of the SIS quasi-stationary distribution.

Covered here: the stationary distributions ``p0`` and ``p1`` of the two
non-absorbing auxiliary chains, the Ovaskainen family (``ovb`` building
block, ``ov1``, ``ov2``, normalised ``ov3``), the truncated geometric
distributions ``g1``/``g2`` for the subcritical regime, and a beta-binomial
moment-matched to a reference distribution.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from .distribution import Distribution, ModelTag
from .numerics import PrecisionError, default_context, to_mpfr


class InvalidRegimeError(ValueError):
    """The approximation is undefined for the requested parameters."""


class FitError(ValueError):
    """Method-of-moments fit has no admissible solution."""


WEIGHT_KINDS = ("pi", "rho", "ovb", "ov1", "ov2")


@dataclass(frozen=True)
class WeightVector:
    """Unnormalised masses on ``1..N``; ``weights[k]`` belongs to state ``k + 1``."""

    weights: tuple
    kind: str

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        object.__setattr__(self, "weights", tuple(self.weights))
        if not all(gmpy2.is_finite(w) for w in self.weights):
            raise PrecisionError(f"{self.kind} weights left the exponent range")

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, k):
        return self.weights[k]

    def __iter__(self):
        return iter(self.weights)


@dataclass(frozen=True)
class GeometricParams:
    kappa1: object
    A: object
    variant: str
    N: int
    R0: object


def _ctx_for(model, ctx):
    return ctx or default_context(model.N, model.R0)


def _tag(model):
    return ModelTag(model.N, model.R0, model.alpha)


def _require_sis(model):
    if not model.is_sis:
        raise ValueError("closed-form weights are defined for the SIS model (alpha = 0) only")


def _normalize(weights, model, label):
    total = gmpy2.fsum(weights)
    if not total > 0:
        raise InvalidRegimeError(f"{label}: weights sum to {float(total):.3g}, cannot normalise")
    return Distribution(tuple(w / total for w in weights), _tag(model), label)


# -- auxiliary-process weights ------------------------------------------------

def _pi_products(model):
    """``pi_1 = 1, pi_{n+1} = pi_n * lambda_n / mu_{n+1}`` (any alpha)."""
    out = [mpfr(1)]
    for n in range(1, model.N):
        out.append(out[-1] * model._birth(n) / model._death(n + 1))
    return out


def _rho_products(model):
    """``rho_1 = 1, rho_{n+1} = rho_n * lambda_n / mu_n`` (any alpha)."""
    out = [mpfr(1)]
    for n in range(1, model.N):
        out.append(out[-1] * model._birth(n) / model._death(n))
    return out


def pi_weights(model, ctx=None):
    _require_sis(model)
    with _ctx_for(model, ctx).activate():
        return WeightVector(_pi_products(model), "pi")


def rho_weights(model, ctx=None):
    _require_sis(model)
    with _ctx_for(model, ctx).activate():
        return WeightVector(_rho_products(model), "rho")


def _falling_factorial(N, n):
    # N! / (N - n)! as an exact integer
    out = 1
    for k in range(N - n + 1, N + 1):
        out *= k
    return out


def pi_weights_closed(model, ctx=None):
    """``pi_n = (1/n)(1/R0) N!/(N-n)! (R0/N)^n`` evaluated literally."""
    _require_sis(model)
    with _ctx_for(model, ctx).activate():
        N, r0 = model.N, to_mpfr(model.R0)
        return WeightVector(
            [mpfr(_falling_factorial(N, n)) * (r0 / N) ** n / (n * r0) for n in range(1, N + 1)],
            "pi",
        )


def rho_weights_closed(model, ctx=None):
    """``rho_n = (1/R0) N!/(N-n)! (R0/N)^n`` evaluated literally."""
    _require_sis(model)
    with _ctx_for(model, ctx).activate():
        N, r0 = model.N, to_mpfr(model.R0)
        return WeightVector(
            [mpfr(_falling_factorial(N, n)) * (r0 / N) ** n / r0 for n in range(1, N + 1)],
            "rho",
        )


def p0_distribution(model, ctx=None):
    """Stationary distribution of the chain with ``mu_1`` set to zero."""
    _require_sis(model)
    with _ctx_for(model, ctx).activate():
        return _normalize(_pi_products(model), model, "p0")


def p1_distribution(model, ctx=None):
    """Stationary distribution of the chain with death rates ``mu_{n-1}``."""
    _require_sis(model)
    with _ctx_for(model, ctx).activate():
        return _normalize(_rho_products(model), model, "p1")


# -- Ovaskainen family --------------------------------------------------------

def _check_ov(model):
    _require_sis(model)
    if model.N < 2:
        raise InvalidRegimeError("the Ovaskainen approximations need N >= 2")


def _f_factor(N, r0, i):
    c = mpfr(N) / ((N - 1) * r0)
    return (1 - c) * gmpy2.exp(-N / r0) * (1 - c**i)


def f_factor(N, R0, i, ctx=None):
    """``(1 - c) exp(-N/R0) (1 - c^i)`` with ``c = N / ((N-1) R0)``."""
    if N < 2:
        raise ValueError("f_factor needs N >= 2")
    ctx = ctx or default_context(N, R0)
    with ctx.activate():
        return _f_factor(N, to_mpfr(R0), i)


def _ovb_bulk(N, r0, i):
    return N * (N / r0) ** (N - i) / (i * mpfr(gmpy2.fac(N - i)))


def _ovb_top(N, r0):
    return 1 - mpfr(N) ** 2 / ((N - 1) * r0)


def ovb_weights(model, ctx=None):
    _check_ov(model)
    with _ctx_for(model, ctx).activate():
        N, r0 = model.N, to_mpfr(model.R0)
        w = [_ovb_bulk(N, r0, i) for i in range(1, N)]
        w.append(_ovb_top(N, r0))
        return WeightVector(w, "ovb")


def ov1_weights(model, ctx=None):
    """``F_i * ovb_i`` for every ``i``; the top entry is typically negative."""
    _check_ov(model)
    with _ctx_for(model, ctx).activate():
        N, r0 = model.N, to_mpfr(model.R0)
        w = [_f_factor(N, r0, i) * _ovb_bulk(N, r0, i) for i in range(1, N)]
        w.append(_f_factor(N, r0, N) * _ovb_top(N, r0))
        return WeightVector(w, "ov1")


def _ov2(model):
    N, r0 = model.N, to_mpfr(model.R0)
    return [_f_factor(N, r0, i) * _ovb_bulk(N, r0, i) for i in range(1, N + 1)]


def ov2_weights(model, ctx=None):
    """The bulk formula of ``ov1`` applied to every state including ``N``."""
    _check_ov(model)
    with _ctx_for(model, ctx).activate():
        return WeightVector(_ov2(model), "ov2")


def ov3_distribution(model, ctx=None):
    """``ov2`` normalised to a probability distribution."""
    _check_ov(model)
    if not model.R0 > 1:
        warnings.warn(
            f"ov3 requested below threshold (R0={model.R0}); it is only claimed for R0 > 1",
            stacklevel=2,
        )
    with _ctx_for(model, ctx).activate():
        return _normalize(_ov2(model), model, "ov3")


# -- geometric approximations (subcritical) -----------------------------------

def geometric_params(model, variant, ctx=None):
    """Mean of the geometric approximation.

    ``G1``: ``kappa1 = (A + sqrt(A^2 + 8N/R0)) / 4`` with
    ``A = 1 - N (1 - R0) / R0``. ``G2``: ``kappa1 = 1 / (1 - R0)``.
    """
    variant = variant.upper()
    if variant not in ("G1", "G2"):
        raise ValueError(f"unknown geometric variant {variant!r}")
    ctx = _ctx_for(model, ctx)
    with ctx.activate():
        N, r0 = model.N, to_mpfr(model.R0)
        A = 1 - N * (1 - r0) / r0
        if variant == "G2":
            if not model.R0 < 1:
                raise InvalidRegimeError("G2 needs R0 < 1")
            kappa1 = 1 / (1 - r0)
        else:
            kappa1 = (A + gmpy2.sqrt(A * A + 8 * N / r0)) / 4
            if kappa1 < 1:
                # N = 1 gives exactly 1 up to rounding
                if 1 - kappa1 > ctx.equality_tol:
                    raise InvalidRegimeError(f"G1 mean {float(kappa1):.6g} is below 1")
                kappa1 = mpfr(1)
        return GeometricParams(kappa1, A, variant, N, model.R0)


def geometric_distribution(params, N=None, ctx=None):
    """Geometric pmf ``p (1 - p)^(i - 1)`` on ``1..N`` with ``p = 1/kappa1``.

    Not renormalised; the mass beyond ``N`` is kept in ``tail_mass``.
    """
    N = params.N if N is None else N
    if N != params.N:
        raise ValueError(f"params were built for N={params.N}, not {N}")
    ctx = ctx or default_context(N, params.R0)
    with ctx.activate():
        p = 1 / params.kappa1
        q = 1 - p
        probs = [p * q ** (i - 1) for i in range(1, N + 1)]
        return Distribution(
            tuple(probs), ModelTag(N, params.R0), params.variant.lower(), tail_mass=q**N
        )


# -- beta-binomial -------------------------------------------------------------

def beta_binomial_shapes(mean, var, n):
    """Method-of-moments shapes ``(a, b)`` of a beta-binomial on ``0..n``.

    Solves ``mean = n a/(a+b)`` and
    ``var = n a b (a+b+n) / ((a+b)^2 (a+b+1))`` under the active context.
    """
    if n < 2:
        raise FitError("shapes are not identifiable with fewer than 2 trials")
    p = mean / n
    if not 0 < p < 1:
        raise FitError(f"mean {float(mean):.6g} outside (0, {n})")
    # var / binomial var = (s + n) / (s + 1) with s = a + b
    r = var / (n * p * (1 - p))
    if not 1 < r < n:
        raise FitError(f"dispersion ratio {float(r):.6g} outside (1, {n})")
    s = (n - r) / (r - 1)
    return p * s, (1 - p) * s


def beta_binomial_pmf(n, a, b):
    """Beta-binomial pmf on ``0..n`` built from the ratio of successive terms."""
    terms = [mpfr(1)]
    for k in range(n):
        terms.append(terms[-1] * (n - k) * (k + a) / ((k + 1) * (n - k - 1 + b)))
    total = gmpy2.fsum(terms)
    return [t / total for t in terms]


def beta_binomial_fit(q_exact, N=None, ctx=None):
    """Beta-binomial on ``1..N`` (shifted from ``0..N-1``) matching the mean and
    variance of ``q_exact``."""
    N = q_exact.N if N is None else N
    if N != q_exact.N:
        raise ValueError(f"reference distribution has N={q_exact.N}, not {N}")
    if N < 2:
        raise FitError("beta-binomial fit needs N >= 2")
    ctx = ctx or default_context(N, q_exact.model_tag.R0)
    with ctx.activate():
        shifted_mean = gmpy2.fsum(p * k for k, p in enumerate(q_exact))
        var = gmpy2.fsum(p * (k - shifted_mean) ** 2 for k, p in enumerate(q_exact))
        n = N - 1
        if n == 1:
            # Bernoulli: every shape pair with the right mean gives the same law
            probs = [1 - shifted_mean, shifted_mean]
        else:
            a, b = beta_binomial_shapes(shifted_mean, var, n)
            probs = beta_binomial_pmf(n, a, b)
        return Distribution(tuple(probs), q_exact.model_tag, "beta_binomial")
