"""Log-normal fading model: closed-form mean and moment-matched fit."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DegenerateFitError
from ..turbulence_params import BeamConfig, ChannelConfig, TurbulenceStats
from .estimators import extended_grid
from .sampling import LogNormalParams, PdtEstimate

__all__ = ["long_term_w_sq", "lognormal_mean", "lognormal_params", "fit_lognormal"]


def long_term_w_sq(stats: TurbulenceStats, beam: BeamConfig) -> float:
    """Long-term mean-square radius ``W0^2 exp(<Theta> + <dTheta^2>/2) + 4 <dx0^2>``."""
    s_xx = beam.w0**2 * math.exp(stats.theta_mean + 0.5 * stats.theta_var)
    return s_xx + 4.0 * stats.wander_var


def lognormal_mean(stats: TurbulenceStats, beam: BeamConfig, channel: ChannelConfig) -> float:
    """Mean transmittance ``1 - exp(-2 a^2 / <W^2>)``, without deterministic attenuation."""
    a = channel.aperture_radius
    return -math.expm1(-2.0 * a * a / long_term_w_sq(stats, beam))


def lognormal_params(mean: float, second_moment: float) -> LogNormalParams:
    """Match ``<eta>`` and ``<eta^2>``: ``sigma^2 = ln(<eta^2>/<eta>^2)``, ``mu = -ln(<eta>^2/sqrt(<eta^2>))``."""
    if not (mean > 0 and second_moment > 0):
        raise DegenerateFitError("log-normal fit needs positive moments")
    ratio = second_moment / mean**2
    if not ratio > 1.0:
        raise DegenerateFitError("reference has no spread; log-normal fit degenerates")
    sigma = math.sqrt(math.log(ratio))
    mu = -math.log(mean**2 / math.sqrt(second_moment))
    return LogNormalParams(mu=mu, sigma=sigma)


def fit_lognormal(reference: PdtEstimate, upper: float = 1.2) -> PdtEstimate:
    """Log-normal distribution with the first two moments of ``reference``.

    The density is reported on the standard grid continued past 1 up to
    ``upper``; mass above 1 is kept, not clipped.
    """
    s = reference.samples
    if s.size < 2 or np.all(s == s[0]):
        raise DegenerateFitError("reference needs at least two distinct samples")
    params = lognormal_params(reference.mean, reference.second_moment)
    grid = extended_grid(upper)
    return PdtEstimate(
        model_tag="log_normal",
        samples=np.array([]),
        mean=params.mean,
        mean_se=reference.mean_se,
        second_moment=params.second_moment,
        second_moment_se=reference.second_moment_se,
        grid=grid,
        density=params.pdf(grid),
        attenuation=reference.attenuation,
        params=params,
    )
