"""Exact quasi-stationary distribution of a logistic birth-death chain.

Two independent routes are provided. :func:`solve_qsd` iterates the
flux-balance recursion obtained by summing the quasi-stationarity equations
over the states above each edge. :func:`qsd_power_oracle` runs power
iteration on the uniformised transient block of the generator.
"""

from __future__ import annotations

import numpy as np
import gmpy2
from gmpy2 import mpfr

from . import approx
from .distribution import Distribution, ModelTag
from .numerics import PrecisionError, default_context

__all__ = [
    "Distribution",
    "SolverError",
    "balance_residuals",
    "decay_rate",
    "qsd_power_oracle",
    "solve_qsd",
]

MAX_ITER = 10**6
MAX_SQUARINGS = 64


class SolverError(RuntimeError):
    """The iteration hit its cap before converging."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def _tag(model):
    return ModelTag(model.N, model.R0, model.alpha)


def _point_mass(model):
    return Distribution((mpfr(1),), _tag(model))


def _max_rel_change(new, old):
    return max(abs(a - b) / a for a, b in zip(new, old))


def _start_vector(model, start):
    if start == "uniform":
        return [mpfr(1) / model.N] * model.N
    if start != "auto":
        raise ValueError(f"unknown start {start!r}")
    weights = approx._pi_products(model) if model.R0 > 1 else approx._rho_products(model)
    total = gmpy2.fsum(weights)
    return [w / total for w in weights]


def solve_qsd(model, ctx=None, *, start="auto", max_iter=MAX_ITER):
    """Quasi-stationary distribution by fixed-point iteration.

    Each sweep keeps ``q_1`` and the tail masses ``T_m = sum_{k >= m} q_k`` of
    the current iterate and rebuilds the vector from

        mu_{m+1} q_{m+1} = lambda_m q_m + mu_1 q_1 T_{m+1},

    then renormalises. Every term is non-negative, so the sweep involves no
    cancellation. The starting vector is ``p0`` above threshold and ``p1``
    otherwise (``start="uniform"`` overrides).

    Iteration stops once the componentwise relative change is below
    ``ctx.fixed_point_tol`` and the geometric tail estimate of the remaining
    error is too.
    """
    ctx = ctx or default_context(model.N, model.R0)
    if model.N == 1:
        with ctx.activate():
            return _point_mass(model)
    tol = ctx.fixed_point_tol
    with ctx.activate():
        lam, mu = model._rates()
        N = model.N
        q = _start_vector(model, start)
        prev_change = None
        prev_step = None
        alternations = 0
        change = None
        for _ in range(max_iter):
            tails = [mpfr(0)] * (N + 1)
            acc = mpfr(0)
            for k in range(N - 1, -1, -1):
                acc += q[k]
                tails[k] = acc
            theta = mu[1] * q[0]
            new = [q[0]]
            for m in range(1, N):
                new.append((lam[m] * new[-1] + theta * tails[m]) / mu[m + 1])
            total = gmpy2.fsum(new)
            new = [x / total for x in new]
            if any(x <= 0 for x in new):
                raise PrecisionError("non-positive mass in QSD iterate; raise precision")

            step = new[0] - q[0]
            if prev_step is not None and step * prev_step < 0:
                alternations += 1
            else:
                alternations = 0
            if alternations >= 2:
                # damp a sign-alternating update of q_1
                new = [(a + b) / 2 for a, b in zip(new, q)]
                alternations = 0
            prev_step = step

            change = _max_rel_change(new, q)
            q = new
            if change < tol:
                if change == 0 or prev_change is None:
                    break
                rate = change / prev_change
                if rate < 1 and change * rate / (1 - rate) < tol:
                    break
            prev_change = change
        else:
            raise SolverError(
                f"QSD iteration did not converge in {max_iter} sweeps (N={N}, R0={model.R0})",
                residual=change,
            )
        return Distribution(tuple(q), _tag(model))


def _step_matrix(model):
    lam, mu = model._rates()
    N = model.N
    # uniformisation constant strictly above the largest exit rate keeps a
    # positive diagonal, hence aperiodicity
    big = max(lam[n] + mu[n] for n in range(1, N + 1)) * 9 / 8
    zero = mpfr(0)
    M = np.full((N, N), zero, dtype=object)
    for i in range(N):
        n = i + 1
        M[i, i] = 1 - (lam[n] + mu[n]) / big
        if n < N:
            M[i, i + 1] = lam[n] / big
        if n > 1:
            M[i, i - 1] = mu[n] / big
    return M


def qsd_power_oracle(model, ctx=None, *, max_squarings=MAX_SQUARINGS):
    """Quasi-stationary distribution as the left Perron vector of the
    uniformised transient block ``M``.

    Iterates ``v <- v P / |v P|_1`` where ``P`` starts at ``M`` and is squared
    after every step, so step ``k`` applies ``M^(2^k)``. Independent of
    :func:`solve_qsd`: it never touches the flux recursion.
    """
    ctx = ctx or default_context(model.N, model.R0)
    if model.N == 1:
        with ctx.activate():
            return _point_mass(model)
    tol = ctx.fixed_point_tol
    with ctx.activate():
        N = model.N
        P = _step_matrix(model)
        v = np.array([mpfr(1) / N] * N, dtype=object)
        change = None
        for _ in range(max_squarings):
            w = v.dot(P)
            w = w / gmpy2.fsum(w)
            if any(x <= 0 for x in w):
                raise PrecisionError("non-positive mass in power iterate; raise precision")
            change = _max_rel_change(w, v)
            v = w
            if change < tol:
                break
            P = P.dot(P)
            P = P / max(P.flat)
        else:
            raise SolverError(
                f"power iteration did not converge after {max_squarings} squarings",
                residual=change,
            )
        return Distribution(tuple(v), _tag(model))


def decay_rate(q, model):
    """Absorption flux ``mu_1 q_1``: the exponential decay rate of the
    conditioned process."""
    with gmpy2.context(precision=q.precision):
        return model._death(1) * q[0]


def balance_residuals(q, model):
    """Residuals of the quasi-stationarity equations at ``q``, states ``1..N``.

    ``lambda_{n-1} q_{n-1} - (lambda_n + mu_n) q_n + mu_{n+1} q_{n+1}
    + mu_1 q_1 q_n`` with ``q_0 = q_{N+1} = 0``.
    """
    N = model.N
    with gmpy2.context(precision=q.precision):
        lam, mu = model._rates()
        x = [mpfr(0), *q.probs, mpfr(0)]
        theta = mu[1] * x[1]
        out = []
        for n in range(1, N + 1):
            up = mu[n + 1] * x[n + 1] if n < N else mpfr(0)
            out.append(lam[n - 1] * x[n - 1] - (lam[n] + mu[n]) * x[n] + up + theta * x[n])
        return out
