"""Gaussian quadrature statistics through a fluctuating-loss channel, with postselection.

Each transmittance value ``eta`` acts as a beamsplitter mixing the signal
with vacuum: the quadrature mean scales by ``sqrt(eta)`` and the variance
becomes ``eta var + 1 - eta`` (shot-noise units). The output state is the
mixture over the transmittance distribution, whose first two moments give

    mean_out = <sqrt(eta)> mean_in
    var_out  = <eta> var_in + 1 - <eta> + (<eta> - <sqrt(eta)>^2) mean_in^2

where the averages run over the postselected samples ``eta >= eta_min``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import ndtr

from .channel_models import PdtEstimate
from .errors import AcceptanceError, DomainError

__all__ = [
    "GaussianQuadState",
    "PostselectionCurve",
    "db_to_var",
    "var_to_db",
    "propagate",
    "squeezing_curve",
]


def db_to_var(db):
    """Quadrature variance ``10^(dB/10)`` relative to vacuum."""
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0) if np.ndim(db) else 10.0 ** (db / 10.0)


def var_to_db(var):
    """Squeezing in dB, ``10 log10(var)``; negative values are squeezed."""
    v = np.asarray(var, dtype=float)
    if np.any(~(v > 0)):
        raise DomainError("variance must be > 0")
    out = 10.0 * np.log10(v)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaussianQuadState:
    """Single quadrature of a Gaussian state in shot-noise units (vacuum variance 1)."""

    mean_x: float
    var_x: float

    def __post_init__(self):
        if not (math.isfinite(self.var_x) and self.var_x > 0):
            raise DomainError(f"var_x must be finite and > 0, got {self.var_x!r}")
        if not math.isfinite(self.mean_x):
            raise DomainError("mean_x must be finite")

    @classmethod
    def squeezed(cls, db: float, mean_x: float = 0.0) -> "GaussianQuadState":
        return cls(mean_x=mean_x, var_x=db_to_var(db))

    @property
    def squeezing_db(self) -> float:
        return var_to_db(self.var_x)


@dataclass(frozen=True)
class PostselectionCurve:
    """Output squeezing versus postselection threshold.

    ``truncated[i]`` marks thresholds above every sample; their squeezing is
    NaN and their acceptance 0.
    """

    thresholds: np.ndarray
    squeezing_db: np.ndarray
    acceptance_fraction: np.ndarray
    truncated: np.ndarray

    def __post_init__(self):
        n = len(self.thresholds)
        for name in ("thresholds", "squeezing_db", "acceptance_fraction", "truncated"):
            arr = np.array(getattr(self, name), dtype=bool if name == "truncated" else float)
            if arr.shape != (n,):
                raise DomainError(f"{name} must have length {n}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def is_truncated(self) -> bool:
        return bool(self.truncated.any())


def _postselect(eta: np.ndarray, eta_min: float) -> np.ndarray:
    kept = eta[eta >= eta_min]
    if kept.size == 0:
        raise AcceptanceError(eta_min)
    return kept


def propagate(state: GaussianQuadState, eta_samples, eta_min: float = 0.0) -> GaussianQuadState:
    """Output quadrature state after the channel, conditioned on ``eta >= eta_min``.

    Raises
    ------
    AcceptanceError
        If no sample reaches ``eta_min``.
    """
    eta = np.asarray(eta_samples, dtype=float).ravel()
    if np.any(eta < 0) or np.any(eta > 1):
        raise DomainError("transmittance samples must lie in [0, 1]")
    kept = _postselect(eta, eta_min)
    m_eta = float(np.mean(kept))
    m_sqrt = float(np.mean(np.sqrt(kept)))
    var = m_eta * state.var_x + (1.0 - m_eta) + (m_eta - m_sqrt**2) * state.mean_x**2
    return GaussianQuadState(mean_x=m_sqrt * state.mean_x, var_x=var)


def squeezing_curve(
    state: GaussianQuadState,
    pdt: PdtEstimate,
    thresholds,
    *,
    threshold_on: Literal["total", "pre_attenuation"] = "total",
) -> PostselectionCurve:
    """Postselected output squeezing for every threshold in ``thresholds``.

    By default thresholds apply to the total transmittance (deterministic
    attenuation included). With ``threshold_on="pre_attenuation"`` they are
    compared against the aperture transmittance alone, while the state is
    still propagated through the total transmittance.
    """
    thr = np.asarray(thresholds, dtype=float).ravel()
    if np.any(np.diff(thr) < 0):
        raise DomainError("thresholds must be sorted ascending")
    if threshold_on not in ("total", "pre_attenuation"):
        raise DomainError(f"unknown threshold_on {threshold_on!r}")
    if pdt.params is not None:
        scale = pdt.attenuation if threshold_on == "pre_attenuation" else 1.0
        return _lognormal_curve(state, pdt.params, thr, scale)
    eta = np.asarray(pdt.samples, dtype=float)
    if eta.size == 0:
        raise DomainError("squeezing_curve needs samples or log-normal parameters")
    if threshold_on == "total":
        test = eta
    else:
        test = eta / pdt.attenuation

    sq = np.full(thr.size, np.nan)
    acc = np.zeros(thr.size)
    trunc = np.zeros(thr.size, dtype=bool)
    for i, t in enumerate(thr):
        mask = test >= t
        kept = int(np.count_nonzero(mask))
        if kept == 0:
            trunc[i] = True
            continue
        sq[i] = propagate(state, eta[mask]).squeezing_db
        acc[i] = kept / eta.size
    return PostselectionCurve(thr, sq, acc, trunc)


def _lognormal_curve(state, params, thr, scale) -> PostselectionCurve:
    # ln(eta) ~ N(m, s^2) with m = -mu; partial moments above t in closed form
    m, s = -params.mu, params.sigma
    with np.errstate(divide="ignore"):
        log_t = np.log(thr * scale)
    p = ndtr((m - log_t) / s)
    part_eta = math.exp(m + 0.5 * s * s) * ndtr((m + s * s - log_t) / s)
    part_sqrt = math.exp(0.5 * m + 0.125 * s * s) * ndtr((m + 0.5 * s * s - log_t) / s)
    sq = np.full(thr.size, np.nan)
    trunc = p <= 0
    ok = ~trunc
    m_eta = part_eta[ok] / p[ok]
    m_sqrt = part_sqrt[ok] / p[ok]
    var = m_eta * state.var_x + (1.0 - m_eta) + (m_eta - m_sqrt**2) * state.mean_x**2
    # mass above eta = 1 can push the variance to nonsense at extreme thresholds
    with np.errstate(invalid="ignore", divide="ignore"):
        sq[ok] = np.where(var > 0, 10.0 * np.log10(np.abs(var)), np.nan)
    return PostselectionCurve(thr, sq, np.where(ok, p, 0.0), trunc)
