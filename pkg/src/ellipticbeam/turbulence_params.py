"""Gaussian statistics of the beam parameters for weak and strong turbulence.

The beam centroid ``(x0, y0)`` and the log-shape variables
``Theta_i = ln(W_i^2 / W0^2)`` are jointly Gaussian. Their first and second
moments follow from closed-form fits in the Rytov parameter ``sigma_R^2``
and the transmitter Fresnel number ``Omega = k W0^2 / (2 L)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np

from .errors import DomainError, ParameterDomainError

__all__ = [
    "BeamConfig",
    "ChannelConfig",
    "TurbulenceStats",
    "WavefrontWarning",
    "COLLIMATED",
    "AUTO_THRESHOLD",
    "wavenumber",
    "rytov_from_cn2",
    "cn2_from_rytov",
    "fresnel_number",
    "fried_radius",
    "theta_moments_from_w2",
    "w2_moments_from_theta",
    "stats_weak",
    "stats_strong",
    "stats",
]

COLLIMATED = "collimated"
AUTO_THRESHOLD = 10.0
RYTOV_COEF = 1.23

Regime = Literal["weak", "strong", "auto"]


class WavefrontWarning(UserWarning):
    """The beam's wavefront radius contradicts the selected parameter table."""


def _positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class BeamConfig:
    """Transmitted Gaussian beam.

    Attributes
    ----------
    wavelength : float
        Optical wavelength (m).
    w0 : float
        Spot radius at the transmitter (m).
    path_length : float
        Propagation distance ``L`` (m).
    wavefront_radius : float or "collimated"
        Wavefront curvature radius ``F`` (m). ``"collimated"`` stands for
        ``F >> L``.
    """

    wavelength: float
    w0: float
    path_length: float
    wavefront_radius: Union[float, str] = COLLIMATED

    def __post_init__(self):
        _positive("wavelength", self.wavelength)
        _positive("w0", self.w0)
        _positive("path_length", self.path_length)
        if self.wavefront_radius != COLLIMATED:
            _positive("wavefront_radius", self.wavefront_radius)
        if self.wavelength >= self.w0:
            raise DomainError("wavelength must be much smaller than w0")

    @property
    def k(self) -> float:
        return wavenumber(self.wavelength)

    @property
    def is_collimated(self) -> bool:
        return self.wavefront_radius == COLLIMATED


@dataclass(frozen=True)
class ChannelConfig:
    """Atmospheric link and receiver.

    Exactly one of ``rytov_sq`` and ``cn2`` must be given.
    """

    aperture_radius: float
    rytov_sq: float | None = None
    cn2: float | None = None
    det_attenuation_db: float = 0.0
    regime: Regime = "auto"
    auto_threshold: float = AUTO_THRESHOLD

    def __post_init__(self):
        _positive("aperture_radius", self.aperture_radius)
        if (self.rytov_sq is None) == (self.cn2 is None):
            raise DomainError("exactly one of rytov_sq and cn2 must be given")
        if self.rytov_sq is not None:
            _positive("rytov_sq", self.rytov_sq)
        if self.cn2 is not None:
            _positive("cn2", self.cn2)
        if not (math.isfinite(self.det_attenuation_db) and self.det_attenuation_db >= 0):
            raise DomainError("det_attenuation_db must be finite and >= 0")
        if self.regime not in ("weak", "strong", "auto"):
            raise DomainError(f"regime must be weak, strong or auto, got {self.regime!r}")
        _positive("auto_threshold", self.auto_threshold)

    @property
    def attenuation(self) -> float:
        """Linear deterministic transmittance factor ``10^(-dB/10)``."""
        return 10.0 ** (-self.det_attenuation_db / 10.0)

    def rytov(self, beam: BeamConfig) -> float:
        if self.rytov_sq is not None:
            return float(self.rytov_sq)
        return rytov_from_cn2(self.cn2, beam)

    def structure_constant(self, beam: BeamConfig) -> float:
        if self.cn2 is not None:
            return float(self.cn2)
        return cn2_from_rytov(self.rytov_sq, beam)


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TurbulenceStats:
    """Moments of ``(x0, y0, Theta1, Theta2)``.

    ``mean`` and ``cov`` are read-only arrays of shape ``(4,)`` and ``(4, 4)``.
    """

    mean: np.ndarray
    cov: np.ndarray
    fresnel_omega: float
    gamma: float
    rho0: float
    rytov_sq: float
    regime_used: str
    w0: float = field(default=float("nan"))

    def __post_init__(self):
        object.__setattr__(self, "mean", _readonly(self.mean))
        object.__setattr__(self, "cov", _readonly(self.cov))
        if self.mean.shape != (4,) or self.cov.shape != (4, 4):
            raise DomainError("mean must have shape (4,) and cov shape (4, 4)")
        if not np.array_equal(self.cov, self.cov.T):
            raise DomainError("cov must be symmetric")

    @property
    def wander_var(self) -> float:
        """Variance of each centroid coordinate, ``<dx0^2>`` (m^2)."""
        return float(self.cov[0, 0])

    @property
    def theta_mean(self) -> float:
        return float(self.mean[2])

    @property
    def theta_var(self) -> float:
        return float(self.cov[2, 2])

    @property
    def theta_cov(self) -> float:
        return float(self.cov[2, 3])

    @property
    def mean_w_sq(self) -> float:
        """``<W_i^2> = W0^2 exp(<Theta> + <dTheta^2>/2)`` (m^2)."""
        return self.w0**2 * math.exp(self.theta_mean + 0.5 * self.theta_var)

    def as_dict(self) -> dict:
        return {
            "regime_used": self.regime_used,
            "rytov_sq": self.rytov_sq,
            "fresnel_omega": self.fresnel_omega,
            "gamma": self.gamma,
            "rho0_m": self.rho0,
            "wander_var_m2": self.wander_var,
            "theta_mean": self.theta_mean,
            "theta_var": self.theta_var,
            "theta_cov": self.theta_cov,
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
        }


def wavenumber(wavelength: float) -> float:
    return 2.0 * math.pi / wavelength


def rytov_from_cn2(cn2: float, beam: BeamConfig) -> float:
    """Rytov parameter ``1.23 Cn^2 k^(7/6) L^(11/6)``."""
    if cn2 < 0 or not math.isfinite(cn2):
        raise DomainError("cn2 must be finite and >= 0")
    return RYTOV_COEF * cn2 * beam.k ** (7 / 6) * beam.path_length ** (11 / 6)


def cn2_from_rytov(rytov_sq: float, beam: BeamConfig) -> float:
    """Inverse of :func:`rytov_from_cn2`."""
    if rytov_sq < 0 or not math.isfinite(rytov_sq):
        raise DomainError("rytov_sq must be finite and >= 0")
    return rytov_sq / (RYTOV_COEF * beam.k ** (7 / 6) * beam.path_length ** (11 / 6))


def fresnel_number(beam: BeamConfig) -> float:
    """Transmitter Fresnel number ``Omega = k W0^2 / (2 L)``."""
    return beam.k * beam.w0**2 / (2.0 * beam.path_length)


def fried_radius(cn2: float, beam: BeamConfig) -> float:
    """Field coherence radius ``rho0 = (1.5 Cn^2 k^2 L)^(-3/5)`` (m)."""
    if cn2 <= 0:
        return math.inf
    return (1.5 * cn2 * beam.k**2 * beam.path_length) ** (-3 / 5)


def theta_moments_from_w2(mean_w2: float, mean_w2_sq: float, cross_w2: float, w0: float):
    """Log-normal moment map ``(<W^2>, <W^4>, <W1^2 W2^2>) -> (<Theta>, var, cov)``.

    ``Theta = ln(W^2 / W0^2)`` is Gaussian, so
    ``<Theta> = ln(<W^2>^2 / (W0^2 sqrt(<W^4>)))``,
    ``var = ln(<W^4> / <W^2>^2)`` and ``cov = ln(<W1^2 W2^2> / <W^2>^2)``.
    """
    if mean_w2 <= 0:
        raise ParameterDomainError("<W^2>", "must be > 0")
    if mean_w2_sq <= 0:
        raise ParameterDomainError("<W^4>", "must be > 0")
    if cross_w2 <= 0:
        raise ParameterDomainError("<W1^2 W2^2>", "must be > 0")
    mean = math.log(mean_w2**2 / (w0**2 * math.sqrt(mean_w2_sq)))
    var = math.log(mean_w2_sq / mean_w2**2)
    cov = math.log(cross_w2 / mean_w2**2)
    return mean, var, cov


def w2_moments_from_theta(theta_mean: float, theta_var: float, theta_cov: float, w0: float):
    """Inverse of :func:`theta_moments_from_w2`."""
    mean_w2 = w0**2 * math.exp(theta_mean + 0.5 * theta_var)
    mean_w2_sq = w0**4 * math.exp(2.0 * theta_mean + 2.0 * theta_var)
    cross = w0**4 * math.exp(2.0 * theta_mean + theta_var + theta_cov)
    return mean_w2, mean_w2_sq, cross


def _log_arg(entry: str, value: float) -> float:
    if not (value > 0 and math.isfinite(value)):
        raise ParameterDomainError(entry, f"logarithm argument {value!r} is not positive")
    return math.log(value)


def _assemble(beam, channel, wander, theta_mean, theta_var, theta_cov, omega, rytov, regime):
    cov = np.zeros((4, 4))
    cov[0, 0] = cov[1, 1] = wander
    cov[2, 2] = cov[3, 3] = theta_var
    cov[2, 3] = cov[3, 2] = theta_cov
    if theta_var < abs(theta_cov) - 1e-15 * max(1.0, theta_var):
        raise ParameterDomainError("<dTheta1 dTheta2>", "covariance matrix is not positive semi-definite")
    return TurbulenceStats(
        mean=[0.0, 0.0, theta_mean, theta_mean],
        cov=cov,
        fresnel_omega=omega,
        gamma=(1.0 + omega**2) / omega**2,
        rho0=fried_radius(channel.structure_constant(beam), beam),
        rytov_sq=rytov,
        regime_used=regime,
        w0=beam.w0,
    )


def stats_weak(beam: BeamConfig, channel: ChannelConfig) -> TurbulenceStats:
    """Weak-turbulence moments (focused beam, ``F = L``)."""
    rytov = channel.rytov(beam)
    omega = fresnel_number(beam)
    u = rytov * omega ** (5 / 6)
    big = 1.0 + 2.96 * u
    wander = 0.33 * beam.w0**2 * rytov * omega ** (-7 / 6)
    theta_mean = _log_arg(
        "<Theta>", big**2 / (omega**2 * math.sqrt(big**2 + 1.2 * u))
    )
    theta_var = _log_arg("<dTheta^2>", 1.0 + 1.2 * u / big**2)
    theta_cov = _log_arg("<dTheta1 dTheta2>", 1.0 - 0.8 * u / big**2)
    return _assemble(beam, channel, wander, theta_mean, theta_var, theta_cov, omega, rytov, "weak")


def stats_strong(beam: BeamConfig, channel: ChannelConfig) -> TurbulenceStats:
    """Strong-turbulence moments (collimated beam, ``Omega > 1``)."""
    rytov = channel.rytov(beam)
    omega = fresnel_number(beam)
    if omega <= 1.0:
        raise ParameterDomainError("fresnel_omega", f"strong table requires Omega > 1, got {omega:.6g}")
    gamma = (1.0 + omega**2) / omega**2
    s85 = rytov ** (4 / 5)  # sigma_R^(8/5)
    s125 = rytov ** (6 / 5)  # sigma_R^(12/5)
    m = gamma + 1.71 * s125 / omega - 2.99 * s85 / omega
    if m <= 0:
        raise ParameterDomainError("M", f"shape factor must be > 0, got {m:.6g}")
    q = gamma * s125 / omega
    wander = 0.75 * beam.w0**2 * s85 / omega
    theta_mean = _log_arg("<Theta>", m**2 / math.sqrt(m**2 + 3.24 * q))
    theta_var = _log_arg("<dTheta^2>", 1.0 + 13.14 * q / m**2)
    theta_cov = _log_arg("<dTheta1 dTheta2>", 1.0 + 0.65 * q / m**2)
    return _assemble(beam, channel, wander, theta_mean, theta_var, theta_cov, omega, rytov, "strong")


def _check_wavefront(beam: BeamConfig, regime: str) -> None:
    if regime == "weak" and (
        beam.is_collimated or not math.isclose(beam.wavefront_radius, beam.path_length, rel_tol=1e-3)
    ):
        warnings.warn(
            "weak-turbulence table assumes a focused beam (wavefront radius = path length)",
            WavefrontWarning,
            stacklevel=3,
        )
    elif regime == "strong" and not beam.is_collimated and beam.wavefront_radius < 10 * beam.path_length:
        warnings.warn(
            "strong-turbulence table assumes a collimated beam (wavefront radius >> path length)",
            WavefrontWarning,
            stacklevel=3,
        )


def stats(beam: BeamConfig, channel: ChannelConfig) -> TurbulenceStats:
    """Dispatch to the weak or strong table according to ``channel.regime``.

    ``"auto"`` picks the weak table when ``sigma_R^2 <= channel.auto_threshold``.
    """
    regime = channel.regime
    if regime == "auto":
        regime = "weak" if channel.rytov(beam) <= channel.auto_threshold else "strong"
    _check_wavefront(beam, regime)
    return stats_weak(beam, channel) if regime == "weak" else stats_strong(beam, channel)
