"""Monte Carlo transmittance sampling for the elliptic-beam and beam-wandering models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import ndtr

from ..beam_geometry import transmittance_array
from ..errors import DomainError, ParameterDomainError
from ..turbulence_params import BeamConfig, ChannelConfig, TurbulenceStats
from . import streams
from .estimators import StepFunction, ecdf, exceedance, kde, moment_with_se

__all__ = [
    "SamplerConfig",
    "PdtEstimate",
    "LogNormalParams",
    "sample_elliptic",
    "sample_beam_wandering",
    "estimate_from_samples",
    "theta_cholesky",
]

ModelTag = Literal["elliptic", "beam_wandering", "log_normal"]
MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class SamplerConfig:
    """Monte Carlo settings.

    ``n_threads`` only affects speed; results depend on ``(seed, n_streams)``.
    """

    n_samples: int
    seed: int = 0
    n_streams: int = 1
    n_threads: int = 1

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise DomainError("n_samples must be an integer >= 1")
        if int(self.n_streams) != self.n_streams or self.n_streams < 1:
            raise DomainError("n_streams must be an integer >= 1")
        if self.n_threads < 1:
            raise DomainError("n_threads must be >= 1")
        if not (0 <= int(self.seed) <= MAX_SEED):
            raise DomainError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class LogNormalParams:
    """``ln(eta) ~ Normal(-mu, sigma^2)``."""

    mu: float
    sigma: float

    @property
    def mean(self) -> float:
        return math.exp(-self.mu + 0.5 * self.sigma**2)

    @property
    def second_moment(self) -> float:
        return math.exp(-2.0 * self.mu + 2.0 * self.sigma**2)

    def cdf(self, eta):
        eta = np.asarray(eta, dtype=float)
        with np.errstate(divide="ignore"):
            z = (np.log(eta) + self.mu) / self.sigma
        return ndtr(z)

    def pdf(self, eta):
        eta = np.asarray(eta, dtype=float)
        out = np.zeros_like(eta)
        pos = eta > 0
        z = (np.log(eta[pos]) + self.mu) / self.sigma
        out[pos] = np.exp(-0.5 * z * z) / (eta[pos] * self.sigma * math.sqrt(2.0 * math.pi))
        return out


@dataclass(frozen=True)
class PdtEstimate:
    """Transmittance distribution of one channel model.

    Sample-based models carry their samples and derived statistics; the
    fitted log-normal model has no samples and evaluates its curves from
    ``params``. ``attenuation`` is the deterministic factor already folded
    into the samples.
    """

    model_tag: ModelTag
    samples: np.ndarray
    mean: float
    mean_se: float
    second_moment: float
    second_moment_se: float
    grid: np.ndarray
    density: np.ndarray
    attenuation: float = 1.0
    params: LogNormalParams | None = field(default=None)

    def __post_init__(self):
        for name in ("samples", "grid", "density"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_samples(self) -> int:
        return int(self.samples.size)

    def cdf(self, eta):
        if self.params is not None:
            return self.params.cdf(eta)
        return self.ecdf(eta)

    @property
    def ecdf(self) -> StepFunction:
        return ecdf(self.samples)

    @property
    def exceedance(self) -> StepFunction:
        return exceedance(self.samples)

    def exceedance_at(self, eta):
        return 1.0 - np.asarray(self.cdf(eta), dtype=float)


def estimate_from_samples(samples: np.ndarray, model_tag: ModelTag, attenuation: float = 1.0) -> PdtEstimate:
    """Wrap transmittance samples with their moments and density estimate."""
    samples = np.asarray(samples, dtype=float)
    if np.any(samples < 0) or np.any(samples > 1):
        raise ParameterDomainError("samples", "transmittance outside [0, 1]")
    mean, mean_se = moment_with_se(samples)
    second, second_se = moment_with_se(samples**2)
    if samples.size >= 2:
        grid, density = kde(samples)
    else:
        grid, density = np.array([]), np.array([])
    return PdtEstimate(
        model_tag=model_tag,
        samples=samples,
        mean=mean,
        mean_se=mean_se,
        second_moment=second,
        second_moment_se=second_se,
        grid=grid,
        density=density,
        attenuation=attenuation,
    )


def theta_cholesky(stats: TurbulenceStats) -> tuple[float, float, float]:
    """Lower Cholesky factor ``(l11, l21, l22)`` of the Theta covariance block."""
    var, cov = stats.theta_var, stats.theta_cov
    if var < 0:
        raise ParameterDomainError("<dTheta^2>", "negative variance")
    if var == 0:
        if cov != 0:
            raise ParameterDomainError("<dTheta1 dTheta2>", "nonzero covariance with zero variance")
        return 0.0, 0.0, 0.0
    l11 = math.sqrt(var)
    l21 = cov / l11
    rest = var - l21 * l21
    if rest < -1e-12 * var:
        raise ParameterDomainError("<dTheta1 dTheta2>", "Theta covariance is not positive semi-definite")
    return l11, l21, math.sqrt(max(rest, 0.0))


def _draw_r0(seed, stream, size, sigma):
    return streams.generator(seed, streams.VAR_R0, stream).rayleigh(sigma, size)


def _draw_chi(seed, stream, size):
    return streams.generator(seed, streams.VAR_CHI, stream).uniform(0.0, 0.5 * math.pi, size)


def _draw_theta(seed, stream, size, stats, chol):
    z = streams.generator(seed, streams.VAR_THETA, stream).standard_normal((size, 2))
    l11, l21, l22 = chol
    t1 = stats.theta_mean + l11 * z[:, 0]
    t2 = stats.theta_mean + l21 * z[:, 0] + l22 * z[:, 1]
    return t1, t2


def _draw_cartesian(seed, stream, size, sigma):
    xy = streams.generator(seed, streams.VAR_XY, stream).normal(0.0, sigma, (size, 2)) if sigma > 0 else np.zeros((size, 2))
    phi = streams.generator(seed, streams.VAR_PHI, stream).uniform(0.0, 0.5 * math.pi, size)
    r0 = np.hypot(xy[:, 0], xy[:, 1])
    chi = phi - np.arctan2(xy[:, 1], xy[:, 0])
    return r0, chi


def _check_inputs(stats: TurbulenceStats, beam: BeamConfig):
    if stats.wander_var < 0:
        raise ParameterDomainError("<dx0^2>", "negative wandering variance")
    if not math.isnan(stats.w0) and not math.isclose(stats.w0, beam.w0, rel_tol=1e-12):
        raise ParameterDomainError("w0", "stats were computed for a different beam")


def sample_elliptic(
    stats: TurbulenceStats,
    beam: BeamConfig,
    channel: ChannelConfig,
    cfg: SamplerConfig,
    *,
    parameterization: Literal["polar", "cartesian"] = "polar",
) -> PdtEstimate:
    """Monte Carlo transmittance distribution of the elliptic-beam model.

    Draws ``r0 ~ Rayleigh(sqrt(<dx0^2>))``, ``chi ~ U[0, pi/2)`` and the
    Gaussian pair ``(Theta1, Theta2)``, sets ``W_i^2 = W0^2 exp(Theta_i)``
    and multiplies the aperture transmittance by the deterministic
    attenuation. ``parameterization="cartesian"`` draws ``(x0, y0, phi)``
    instead, which is equivalent by isotropy and kept for validation.
    """
    _check_inputs(stats, beam)
    chol = theta_cholesky(stats)
    sigma = math.sqrt(stats.wander_var)
    w0_sq = beam.w0**2
    a = channel.aperture_radius
    atten = channel.attenuation

    def work(stream: int, size: int) -> np.ndarray:
        if parameterization == "polar":
            r0 = _draw_r0(cfg.seed, stream, size, sigma)
            chi = _draw_chi(cfg.seed, stream, size)
        elif parameterization == "cartesian":
            r0, chi = _draw_cartesian(cfg.seed, stream, size, sigma)
        else:
            raise DomainError(f"unknown parameterization {parameterization!r}")
        t1, t2 = _draw_theta(cfg.seed, stream, size, stats, chol)
        eta = transmittance_array(r0, chi, w0_sq * np.exp(t1), w0_sq * np.exp(t2), a)
        return eta * atten

    parts = streams.map_streams(work, cfg.n_samples, cfg.n_streams, cfg.n_threads)
    return estimate_from_samples(np.concatenate(parts), "elliptic", atten)


def sample_beam_wandering(
    stats: TurbulenceStats, beam: BeamConfig, channel: ChannelConfig, cfg: SamplerConfig
) -> PdtEstimate:
    """Monte Carlo distribution with a fixed circular spot and random centroid only.

    The spot radius is ``W0^2 exp(<Theta> + <dTheta^2>/2)``; the ``r0`` draws
    are the same as in :func:`sample_elliptic` for equal seeds.
    """
    _check_inputs(stats, beam)
    sigma = math.sqrt(stats.wander_var)
    w_sq = beam.w0**2 * math.exp(stats.theta_mean + 0.5 * stats.theta_var)
    a = channel.aperture_radius
    atten = channel.attenuation

    def work(stream: int, size: int) -> np.ndarray:
        r0 = _draw_r0(cfg.seed, stream, size, sigma)
        eta = transmittance_array(r0, 0.0, w_sq, w_sq, a)
        return eta * atten

    parts = streams.map_streams(work, cfg.n_samples, cfg.n_streams, cfg.n_threads)
    return estimate_from_samples(np.concatenate(parts), "beam_wandering", atten)
