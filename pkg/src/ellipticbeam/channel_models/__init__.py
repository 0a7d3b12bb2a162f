"""Channel models for the transmittance distribution and their estimators."""

from .estimators import (
    GRID_POINTS,
    StepFunction,
    ecdf,
    exceedance,
    extended_grid,
    kde,
    ks_distance,
    moment_with_se,
    silverman_bandwidth,
    standard_grid,
)
from .lognormal import fit_lognormal, lognormal_mean, lognormal_params, long_term_w_sq
from .sampling import (
    LogNormalParams,
    PdtEstimate,
    SamplerConfig,
    estimate_from_samples,
    sample_beam_wandering,
    sample_elliptic,
    theta_cholesky,
)

__all__ = [
    "GRID_POINTS",
    "LogNormalParams",
    "PdtEstimate",
    "SamplerConfig",
    "StepFunction",
    "ecdf",
    "estimate_from_samples",
    "exceedance",
    "extended_grid",
    "fit_lognormal",
    "kde",
    "ks_distance",
    "lognormal_mean",
    "lognormal_params",
    "long_term_w_sq",
    "moment_with_se",
    "sample_beam_wandering",
    "sample_elliptic",
    "silverman_bandwidth",
    "standard_grid",
    "theta_cholesky",
]
