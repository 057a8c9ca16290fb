"""Command-line front end.

Examples::

    sisqsd --experiment table1
    sisqsd --experiment scaling --r0 2 --n 25,50,100 --approx p0 --format csv
"""

from __future__ import annotations

import argparse
import logging
import sys

from .experiment import (
    APPROXIMATIONS,
    DEFAULTS,
    EXPERIMENTS,
    FORMATS,
    ConfigError,
    ExperimentConfig,
    run_experiment,
    default_approximations,
)
from .report import emit_report

CONFIG_KEYS = {"experiment", "r0", "n", "approx", "precision_bits", "format", "out", "jobs"}


def _split(text):
    return [t.strip() for t in str(text).split(",") if t.strip()]


def read_config_file(path):
    """Flat ``key = value`` file; list values are comma separated, ``#`` starts
    a comment. Keys use the long flag names (``-`` or ``_`` both accepted)."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value
    return values


def build_parser():
    p = argparse.ArgumentParser(
        prog="sisqsd",
        description="Quasi-stationary distribution of the logistic SIS model and its approximations.",
    )
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--r0", help="comma-separated R0 values")
    p.add_argument("--n", help="comma-separated population sizes")
    p.add_argument("--approx", help=f"comma-separated subset of {','.join(APPROXIMATIONS)}")
    p.add_argument("--precision-bits", type=int, dest="precision_bits")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--config", help="key = value experiment file")
    p.add_argument("--jobs", type=int, help="worker processes for grid cells")
    p.add_argument("--no-oracle", action="store_true", help="skip the power-iteration cross-check")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def parse_config(argv=None):
    """Merge defaults, config file and flags (flags win) into an ExperimentConfig."""
    return _parse(argv)[0]


def _parse(argv):
    args = build_parser().parse_args(argv)
    merged = read_config_file(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag

    experiment = merged.get("experiment")
    if experiment is None:
        raise ConfigError("--experiment is required (or set it in --config)")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    base = DEFAULTS.get(experiment, {})

    try:
        r0_values = tuple(float(x) for x in _split(merged["r0"])) if "r0" in merged else base.get("r0_values")
        n_values = tuple(int(x) for x in _split(merged["n"])) if "n" in merged else base.get("n_values")
        bits = merged.get("precision_bits")
        bits = int(bits) if bits is not None else None
        jobs = int(merged.get("jobs", 1))
    except ValueError as exc:
        raise ConfigError(f"malformed numeric value: {exc}") from None
    if not r0_values or not n_values:
        raise ConfigError(f"{experiment} needs --r0 and --n")

    if "approx" in merged:
        approximations = tuple(_split(merged["approx"]))
    elif base:
        approximations = base["approximations"]
    else:
        approximations = default_approximations(r0_values[0], n_values[0])

    return ExperimentConfig(
        experiment=experiment,
        r0_values=r0_values,
        n_values=n_values,
        approximations=approximations,
        precision_bits=bits,
        output_format=merged.get("format", "text-table"),
        output_path=merged.get("out"),
        jobs=jobs,
    ), args


def main(argv=None):
    try:
        config, args = _parse(argv)
    except ConfigError as exc:
        print(f"sisqsd: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"sisqsd: error: cannot read config: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    result = run_experiment(config, check_oracle=not args.no_oracle)
    try:
        emit_report(result.reports, config.output_format, config.output_path,
                    verdicts=result.verdicts, failures=result.failures)
    except OSError as exc:
        print(f"sisqsd: error: cannot write report: {exc}", file=sys.stderr)
        return 2
    return 0 if result.ok else 1


def entry():
    sys.exit(main())
