"""Elliptic Gaussian beams clipped by a circular aperture.

Two routes to the aperture transmittance are provided:

* :func:`transmittance` -- closed-form approximation built from a
  Weibull-like decay in the centroid distance with scale ``R`` and shape
  ``lambda``, evaluated at an effective circular spot radius obtained from
  the Lambert W function.
* :func:`transmittance_numeric` -- direct 2-D quadrature of the elliptic
  intensity over the aperture disc, used as ground truth.

The ``*_array`` functions are the vectorised kernels used by the Monte
Carlo sampler; the state-based functions are thin wrappers around them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DomainError
from .specfun import (
    QuadratureSpec,
    bessel_i0e,
    bessel_i1e,
    integrate_1d,
    integrate_polar_2d,
    lambert_w0_log,
)

__all__ = [
    "EllipticBeamState",
    "Aperture",
    "w_eff_sq",
    "eta_centered",
    "eta_centered_numeric",
    "transmittance",
    "transmittance_numeric",
    "w_eff_sq_array",
    "eta_centered_array",
    "transmittance_array",
    "shape_scale",
    "NEAR_CIRCULAR",
]

HALF_PI = 0.5 * math.pi

# relative ellipticity |W1^2 - W2^2| / (W1^2 + W2^2) below which the beam is
# treated as circular in the centred transmittance
NEAR_CIRCULAR = 1e-6

# beyond this the shape-function series lose accuracy; direct formulas are fine
_SERIES_MAX = 1.0
_ROUND_SLACK = 1e-9


@dataclass(frozen=True)
class Aperture:
    """Circular receiver aperture of radius ``radius`` (m)."""

    radius: float

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError(f"aperture radius must be finite and > 0, got {self.radius}")


@dataclass(frozen=True)
class EllipticBeamState:
    """One realisation of the beam at the aperture plane.

    Attributes
    ----------
    x0, y0 : float
        Beam-centroid position (m).
    w1_sq, w2_sq : float
        Squared semi-axes (m^2). ``w1_sq`` belongs to the axis at angle
        ``phi`` from the x axis.
    phi : float
        Orientation (rad), stored in ``[0, pi/2)``.

    Notes
    -----
    An ellipse with its first axis at ``phi + pi/2`` is the same ellipse as
    one with the semi-axes exchanged and the first axis at ``phi``. Angles
    are therefore reduced modulo ``pi/2`` and, for every odd quarter turn
    removed, the two semi-axes are relabelled. The stored triple then
    describes the same physical spot as the one passed in.
    """

    x0: float
    y0: float
    w1_sq: float
    w2_sq: float
    phi: float = 0.0

    def __post_init__(self):
        for name in ("x0", "y0", "w1_sq", "w2_sq", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not (self.w1_sq > 0 and self.w2_sq > 0):
            raise DomainError("squared semi-axes must be > 0")
        quarters = math.floor(self.phi / HALF_PI)
        phi = self.phi - quarters * HALF_PI
        if phi >= HALF_PI:
            phi -= HALF_PI
            quarters += 1
        if phi < 0.0:
            phi = 0.0
        w1_sq, w2_sq = self.w1_sq, self.w2_sq
        if quarters % 2:
            w1_sq, w2_sq = w2_sq, w1_sq
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "w1_sq", w1_sq)
        object.__setattr__(self, "w2_sq", w2_sq)

    @classmethod
    def from_polar(cls, r0: float, phi0: float, w1_sq: float, w2_sq: float, phi: float):
        return cls(r0 * math.cos(phi0), r0 * math.sin(phi0), w1_sq, w2_sq, phi)

    @property
    def r0(self) -> float:
        return math.hypot(self.x0, self.y0)

    @property
    def phi0(self) -> float:
        return math.atan2(self.y0, self.x0)

    @property
    def chi(self) -> float:
        """Angle between the first semi-axis and the centroid direction."""
        return self.phi - self.phi0


# ---------------------------------------------------------------------------
# shape and scale functions of the Weibull-like decay
# ---------------------------------------------------------------------------

def _series_coefficients(n_terms: int = 30):
    # 1 - e^{-x} I0(x) = sum_n g_n x^n and 2(1 - e^{-x/2}) - (1 - e^{-x} I0(x)) = sum_n d_n x^n
    g = np.zeros(n_terms + 1)
    d = np.zeros(n_terms + 1)
    poch = 1.0  # (1/2)_n
    fact = 1.0  # n!
    for n in range(1, n_terms + 1):
        poch *= n - 0.5
        fact *= n
        sign = (-1.0) ** (n + 1)
        g[n] = sign * poch / fact**2 * 2.0**n
        d[n] = sign * 2.0 ** (1 - n) / fact - g[n]
    return g, d


_G_COEF, _D_COEF = _series_coefficients()


def _poly(coef: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    for c in coef[::-1]:
        out = out * x + c
    return out


def shape_scale(x):
    """Shape ``lambda`` and log-scale term for the argument ``x = a^2 xi^2``.

    Returns ``(lam, log_term)`` with ``log_term = ln(2 (1 - e^{-x/2}) /
    (1 - e^{-x} I0(x)))``, so the scale function is
    ``R = log_term ** (-1 / lam)``. Small ``x`` is handled by power series
    to avoid the cancellation in both numerator and denominator; the limit
    ``x -> 0`` is ``lam -> 2``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("shape_scale: argument must be > 0")
    small = x < _SERIES_MAX
    one_minus = np.where(small, _poly(_G_COEF, x), 1.0 - bessel_i0e(x))
    excess = np.where(
        small, _poly(_D_COEF, x), -2.0 * np.expm1(-0.5 * x) - (1.0 - bessel_i0e(x))
    )
    log_term = np.log1p(excess / one_minus)
    lam = 2.0 * x * bessel_i1e(x) / one_minus / log_term
    return lam, log_term


# ---------------------------------------------------------------------------
# vectorised kernels
# ---------------------------------------------------------------------------

def w_eff_lambert_array(w1_sq, w2_sq, chi, a):
    """Lambert-W value ``4 a^2 / W_eff^2`` (also the shape argument at ``2/W_eff``)."""
    w1_sq = np.asarray(w1_sq, dtype=float)
    w2_sq = np.asarray(w2_sq, dtype=float)
    a2 = a * a
    c2 = np.cos(chi) ** 2
    s2 = 1.0 - c2
    log_arg = (
        np.log(4.0 * a2)
        - 0.5 * (np.log(w1_sq) + np.log(w2_sq))
        + a2 / w1_sq * (1.0 + 2.0 * c2)
        + a2 / w2_sq * (1.0 + 2.0 * s2)
    )
    return lambert_w0_log(log_arg)


def w_eff_sq_array(w1_sq, w2_sq, chi, a):
    """Effective squared spot radius for every (W1^2, W2^2, chi)."""
    return 4.0 * a * a / w_eff_lambert_array(w1_sq, w2_sq, chi, a)


def eta_centered_array(w1_sq, w2_sq, a):
    """Closed-form transmittance of the centred elliptic beam (vectorised)."""
    w1_sq, w2_sq = np.broadcast_arrays(
        np.asarray(w1_sq, dtype=float), np.asarray(w2_sq, dtype=float)
    )
    a2 = a * a
    inv1, inv2 = 1.0 / w1_sq, 1.0 / w2_sq
    s = inv1 + inv2
    d = np.abs(inv1 - inv2)
    circular = np.abs(w1_sq - w2_sq) < NEAR_CIRCULAR * (w1_sq + w2_sq)

    # I0(a^2 d) e^{-a^2 s} = i0e(a^2 d) e^{-a^2 (s - d)}, s - d = 2 / max(W^2)
    bessel_term = bessel_i0e(a2 * d) * np.exp(-2.0 * a2 / np.maximum(w1_sq, w2_sq))

    w1, w2 = np.sqrt(w1_sq), np.sqrt(w2_sq)
    xi_sq = np.where(circular, 1.0, (1.0 / w1 - 1.0 / w2) ** 2)
    x = a2 * xi_sq
    lam, log_term = shape_scale(x)
    ratio = (w1 + w2) / np.where(circular, 1.0, np.abs(w1 - w2))
    # [ratio / R]^lam = ratio^lam * log_term
    tail = -2.0 * np.expm1(-0.5 * x) * np.exp(-(ratio**lam) * log_term)
    eta0 = 1.0 - bessel_term - tail
    eta0 = np.where(circular, -np.expm1(-a2 * s), eta0)
    return _clamp(eta0, "eta_centered")


def transmittance_array(r0, chi, w1_sq, w2_sq, a):
    """Approximate transmittance for arrays of centroid distance, angle and semi-axes.

    Parameters
    ----------
    r0 : array_like
        Centroid distance from the aperture centre (m).
    chi : array_like
        Angle between the first semi-axis and the centroid direction (rad).
    w1_sq, w2_sq : array_like
        Squared semi-axes (m^2).
    a : float
        Aperture radius (m).
    """
    r0 = np.asarray(r0, dtype=float)
    eta0 = eta_centered_array(w1_sq, w2_sq, a)
    x_eff = w_eff_lambert_array(w1_sq, w2_sq, chi, a)
    lam, log_term = shape_scale(x_eff)
    eta = eta0 * np.exp(-((r0 / a) ** lam) * log_term)
    return _clamp(eta, "transmittance")


def _clamp(eta: np.ndarray, what: str) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    if np.any(~np.isfinite(eta)) or np.any(eta < -_ROUND_SLACK) or np.any(eta > 1 + _ROUND_SLACK):
        bad = eta[~np.isfinite(eta) | (eta < -_ROUND_SLACK) | (eta > 1 + _ROUND_SLACK)]
        raise ConsistencyError(f"{what} outside [0, 1]: {bad[:5]}")
    return np.clip(eta, 0.0, 1.0)


# ---------------------------------------------------------------------------
# state-based API
# ---------------------------------------------------------------------------

def w_eff_sq(beam: EllipticBeamState, chi: float, aperture: Aperture) -> float:
    """Squared radius of the circular beam that mimics ``beam`` along direction ``chi``."""
    return float(w_eff_sq_array(beam.w1_sq, beam.w2_sq, chi, aperture.radius))


def eta_centered(beam: EllipticBeamState, aperture: Aperture) -> float:
    """Closed-form transmittance of ``beam`` with its centroid moved to the aperture centre."""
    return float(eta_centered_array(beam.w1_sq, beam.w2_sq, aperture.radius))


def transmittance(beam: EllipticBeamState, aperture: Aperture) -> float:
    """Closed-form aperture transmittance of an elliptic beam."""
    return float(
        transmittance_array(beam.r0, beam.chi, beam.w1_sq, beam.w2_sq, aperture.radius)
    )


def eta_centered_numeric(
    beam: EllipticBeamState,
    aperture: Aperture,
    spec: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Centred transmittance from the 1-D Bessel integral over ``t = r^2``.

    ``eta0 = 2/(W1 W2) * int_0^{a^2} exp(-(1/W1^2 + 1/W2^2) t) I0(|1/W1^2 - 1/W2^2| t) dt``
    """
    inv1, inv2 = 1.0 / beam.w1_sq, 1.0 / beam.w2_sq
    d = abs(inv1 - inv2)
    decay = inv1 + inv2 - d
    pref = 2.0 / math.sqrt(beam.w1_sq * beam.w2_sq)

    def integrand(t):
        return pref * np.exp(-decay * t) * bessel_i0e(d * t)

    a2 = aperture.radius**2
    value = integrate_1d(integrand, 0.0, a2, spec, panels=8)
    return min(max(value, 0.0), 1.0)


def intensity(beam: EllipticBeamState, x, y):
    """Normalised elliptic Gaussian intensity (1/m^2) at points ``(x, y)``."""
    dx = np.asarray(x) - beam.x0
    dy = np.asarray(y) - beam.y0
    c, s = math.cos(beam.phi), math.sin(beam.phi)
    u = dx * c + dy * s
    v = -dx * s + dy * c
    norm = 2.0 / (math.pi * math.sqrt(beam.w1_sq * beam.w2_sq))
    return norm * np.exp(-2.0 * (u * u / beam.w1_sq + v * v / beam.w2_sq))


def transmittance_numeric(
    beam: EllipticBeamState,
    aperture: Aperture,
    spec: QuadratureSpec = QuadratureSpec(),
    *,
    r_max: float | None = None,
) -> float:
    """Aperture transmittance by 2-D polar quadrature of the elliptic intensity.

    ``r_max`` overrides the integration radius (default: the aperture
    radius), which allows checking the normalisation of the intensity.
    """
    r_max = aperture.radius if r_max is None else r_max

    def f(r, theta):
        return intensity(beam, r * np.cos(theta), r * np.sin(theta))

    r0 = beam.r0
    value = integrate_polar_2d(
        f, r_max, spec, phi_center=beam.phi0, r_points=(r0,) if r0 > 0 else ()
    )
    return min(max(value, 0.0), 1.0)
