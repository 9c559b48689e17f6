"""Dual representations of large deviation rates on finite spaces."""

from ._sanov import (
    AlphaSpec,
    InconclusiveError,
    InputError,
    NumericError,
    SampleLaw,
    alpha,
    alpha_n,
    azuma_experiment,
    cramer_lambda,
    cramer_lambda_star,
    deviation_bound,
    estimate_tail,
    lp_entropy_spec,
    moment_mq,
    rate_fit,
    relative_entropy_spec,
    rho,
    rho_argmax,
    rho_n,
    robust_spec,
    sanov_limit,
    set_indicator_spec,
    shortfall_spec,
    superhedge,
    transport_spec,
)

__version__ = "0.1.0"
