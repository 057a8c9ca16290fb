"""Quasi-stationary distribution of the logistic SIS model and its approximations."""

from .approx import (
    FitError,
    InvalidRegimeError,
    beta_binomial_fit,
    geometric_distribution,
    geometric_params,
    ov1_weights,
    ov2_weights,
    ov3_distribution,
    ovb_weights,
    p0_distribution,
    p1_distribution,
    pi_weights,
    rho_weights,
)
from .distribution import Distribution
from .erroranalysis import ErrorReport, ScalingVerdict, classify_scaling, err1, err2
from .model import BirthDeathModel, k_function, ovaskainen_r0, sis_model, verhulst_model
from .numerics import PrecisionContext, PrecisionError, default_context, rel_diff, stable_sum
from .qsd import SolverError, decay_rate, qsd_power_oracle, solve_qsd

__version__ = "0.1.0"
