"""Parameter-grid experiments: the above- and below-threshold grids, doubling scans, single cells."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import approx
from .erroranalysis import ScalingVerdict, classify_scaling, compare
from .model import sis_model
from .numerics import PrecisionContext, default_context, rel_diff
from .qsd import qsd_power_oracle, solve_qsd

log = logging.getLogger(__name__)

EXPERIMENTS = ("table1", "table2", "scaling", "single")
FORMATS = ("csv", "text-table", "json-lines")
APPROXIMATIONS = ("p0", "p1", "ov3", "g1", "g2", "beta_binomial")

TABLE1 = dict(r0_values=(2.0, 5.0, 10.0), n_values=(25, 50, 100),
              approximations=("beta_binomial", "p1", "p0", "ov3"))
TABLE2 = dict(r0_values=(0.5, 0.2, 0.1), n_values=(25, 50, 100),
              approximations=("g1", "g2", "p0", "p1"))
DEFAULTS = {"table1": TABLE1, "table2": TABLE2, "scaling": TABLE1}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    r0_values: tuple
    n_values: tuple
    approximations: tuple
    precision_bits: int | None = None
    output_format: str = "text-table"
    output_path: str | None = None
    jobs: int = 1

    def __post_init__(self):
        validate(self)


def default_approximations(R0, N):
    """Approximations a ``single`` run evaluates when none are requested.

    Everything defined for the cell except ``g2``, whose truncation on
    ``1..N`` is not a probability distribution for small ``N``.
    """
    out = ["p0", "p1"]
    if N >= 2 and R0 > 1:
        out.append("ov3")
    out.append("g1")
    if N >= 2:
        out.append("beta_binomial")
    return tuple(out)


def validate(cfg):
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    if cfg.output_format not in FORMATS:
        raise ConfigError(f"unknown format {cfg.output_format!r}; choose from {', '.join(FORMATS)}")
    if not cfg.r0_values or not cfg.n_values:
        raise ConfigError("at least one R0 and one N value are required")
    if any(not r > 0 for r in cfg.r0_values):
        raise ConfigError("R0 values must be positive")
    if any(n < 1 for n in cfg.n_values):
        raise ConfigError("N values must be positive integers")
    bad = [a for a in cfg.approximations if a not in APPROXIMATIONS]
    if bad:
        raise ConfigError(
            f"unknown approximation(s) {', '.join(bad)}; valid labels: {', '.join(APPROXIMATIONS)}"
        )
    if not cfg.approximations:
        raise ConfigError("no approximations requested")
    if "g2" in cfg.approximations and any(r >= 1 for r in cfg.r0_values):
        raise ConfigError("g2 is only defined for R0 < 1; drop it or restrict --r0")
    if min(cfg.n_values) < 2:
        needs_two = [a for a in cfg.approximations if a in ("ov3", "beta_binomial")]
        if needs_two:
            raise ConfigError(f"{', '.join(needs_two)} need N >= 2")
    if "ov3" in cfg.approximations and any(r <= 1 for r in cfg.r0_values):
        log.warning("ov3 is only claimed above threshold; R0 <= 1 cells are computed anyway")
    if cfg.experiment == "scaling":
        ns = cfg.n_values
        if len(ns) < 3 or any(b != 2 * a for a, b in zip(ns, ns[1:])):
            raise ConfigError(f"scaling needs at least three consecutive doublings of N, got {list(ns)}")
    if cfg.experiment == "single" and (len(cfg.r0_values) != 1 or len(cfg.n_values) != 1):
        raise ConfigError("single evaluates one cell: give exactly one --r0 and one --n")
    if cfg.precision_bits is not None and cfg.precision_bits < 64:
        raise ConfigError("precision bits must be at least 64")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be >= 1")


@dataclass(frozen=True)
class CellFailure:
    R0: object
    N: int
    approx_name: str | None
    message: str


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    reports: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


def _build(name, model, ctx, q):
    if name == "p0":
        return approx.p0_distribution(model, ctx)
    if name == "p1":
        return approx.p1_distribution(model, ctx)
    if name == "ov3":
        return approx.ov3_distribution(model, ctx)
    if name in ("g1", "g2"):
        params = approx.geometric_params(model, name.upper(), ctx)
        return approx.geometric_distribution(params, model.N, ctx)
    if name == "beta_binomial":
        return approx.beta_binomial_fit(q, model.N, ctx)
    raise ValueError(name)


def exact_qsd(R0, N, precision_bits=None, check_oracle=True):
    """Solve the QSD for one cell and (optionally) confirm it with the oracle.

    Returns ``(q, ctx)``; raises ``ArithmeticError``-derived errors from the
    solvers and ``RuntimeError`` on oracle disagreement.
    """
    ctx = PrecisionContext(precision_bits) if precision_bits else default_context(N, R0)
    model = sis_model(N, R0)
    q = solve_qsd(model, ctx)
    if check_oracle:
        oracle = qsd_power_oracle(model, ctx)
        with ctx.activate():
            worst = max(rel_diff(a, b) for a, b in zip(q, oracle))
        if not worst < 10 * ctx.fixed_point_tol:
            raise RuntimeError(f"solver and oracle disagree (max rel diff {float(worst):.3g})")
    return q, ctx


def evaluate_cell(R0, N, approximations, precision_bits=None, check_oracle=True):
    """All requested ErrorReports for one ``(R0, N)`` cell, plus failures."""
    reports, failures = [], []
    try:
        q, ctx = exact_qsd(R0, N, precision_bits, check_oracle)
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        return reports, [CellFailure(R0, N, None, f"exact QSD: {exc}")]
    model = sis_model(N, R0)
    for name in approximations:
        try:
            qhat = _build(name, model, ctx, q)
            report = compare(qhat, q, R0=R0, precision_bits=ctx.significand_bits, approx_name=name)
            report.check()
        except (ArithmeticError, ValueError, AssertionError) as exc:
            failures.append(CellFailure(R0, N, name, str(exc)))
            continue
        reports.append(report)
    return reports, failures


def _evaluate(args):
    return evaluate_cell(*args)


def run_experiment(config, check_oracle=True):
    """Evaluate every cell of ``config`` in (R0, N, approximation) order."""
    cells = [(r0, n) for r0 in config.r0_values for n in config.n_values]
    unique = list(dict.fromkeys(cells))
    args = [(r0, n, config.approximations, config.precision_bits, check_oracle) for r0, n in unique]
    if config.jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(_evaluate, args))
    else:
        outcomes = [_evaluate(a) for a in args]
    by_cell = dict(zip(unique, outcomes))

    result = ExperimentResult(config)
    for cell in cells:
        reports, failures = by_cell[cell]
        result.reports.extend(reports)
        result.failures.extend(failures)
        for f in failures:
            log.error("cell R0=%s N=%s %s failed: %s", f.R0, f.N, f.approx_name or "", f.message)

    if config.experiment == "scaling":
        result.verdicts.extend(_verdicts(config, result.reports))
    return result


def _verdicts(config, reports):
    index = {(r.R0, r.N, r.approx_name): r for r in reports}
    out = []
    for r0 in dict.fromkeys(config.r0_values):
        for name in config.approximations:
            errs = [index.get((r0, n, name)) for n in config.n_values]
            if any(e is None for e in errs):
                continue
            values = [e.err1 for e in errs]
            if any(not v > 0 for v in values):
                out.append(ScalingVerdict(name, r0, tuple(config.n_values), tuple(values), "inconclusive"))
                continue
            out.append(classify_scaling(values, config.n_values, approx_name=name, R0=r0))
    return out
