"""Special functions and adaptive quadrature.

Everything here is vectorised over NumPy arrays and free of module state,
so the routines are safe to call from several threads at once.

The Bessel functions use the ascending power series below ``x = 15`` and
the Hankel asymptotic expansion above it. Exponentially scaled variants
(``e^{-|x|} I_n(x)``) are provided because the transmittance formulas
always multiply ``I_n`` by a decaying exponential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "QuadratureSpec",
    "lambert_w0",
    "lambert_w0_log",
    "bessel_i0",
    "bessel_i1",
    "bessel_i0e",
    "bessel_i1e",
    "integrate_1d",
    "integrate_polar_2d",
]

_EPS = np.finfo(float).eps
_BESSEL_SWITCH = 15.0
_LAMBERT_MAX_ITER = 50


@dataclass(frozen=True)
class QuadratureSpec:
    """Error contract for the adaptive integrators.

    Attributes
    ----------
    abs_tol : float
        Target absolute error of the integral.
    rel_tol : float
        Target error relative to the magnitude of the integral.
    max_evals : int
        Budget of integrand evaluations (for 2-D rules, inner evaluations
        are counted individually).
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_evals: int = 2_000_000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be > 0, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.max_evals < 1:
            raise DomainError(f"max_evals must be >= 1, got {self.max_evals}")


def _as_float_array(x, name: str) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name}: non-finite argument")
    return arr, arr.ndim == 0


def _unwrap(arr: np.ndarray, scalar: bool):
    return float(arr) if scalar else arr


# ---------------------------------------------------------------------------
# Lambert W, principal branch, non-negative arguments
# ---------------------------------------------------------------------------

def _lambert_halley(x: np.ndarray) -> np.ndarray:
    w = np.log1p(x)
    for _ in range(_LAMBERT_MAX_ITER):
        ew = np.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        dw = f / (ew * wp1 - 0.5 * (w + 2.0) * f / wp1)
        w = w - dw
        if np.all(np.abs(dw) <= 4.0 * _EPS * (1.0 + np.abs(w))):
            break
    return w


def _lambert_halley_log(y: np.ndarray) -> np.ndarray:
    # solves w + ln(w) = y, valid for y > 1 (w > 0.56)
    ly = np.log(y)
    w = y - ly + ly / y
    for _ in range(_LAMBERT_MAX_ITER):
        f = w + np.log(w) - y
        fp = 1.0 + 1.0 / w
        fpp = -1.0 / (w * w)
        dw = f / (fp - 0.5 * f * fpp / fp)
        w = w - dw
        if np.all(np.abs(dw) <= 4.0 * _EPS * (1.0 + np.abs(w))):
            break
    return w


def lambert_w0(x):
    """Principal branch of the Lambert W function for ``x >= 0``.

    Halley iteration seeded with ``ln(1 + x)``; arguments above ``1e100``
    are routed through the logarithmic form to avoid overflow.

    Parameters
    ----------
    x : float or array_like
        Non-negative argument(s).

    Returns
    -------
    float or ndarray
        ``w >= 0`` with ``w * exp(w) == x``.

    Raises
    ------
    DomainError
        For negative or non-finite input.
    """
    arr, scalar = _as_float_array(x, "lambert_w0")
    if np.any(arr < 0):
        raise DomainError("lambert_w0: argument must be >= 0")
    out = np.empty_like(arr)
    big = arr > 1e100
    out[~big] = _lambert_halley(arr[~big])
    if np.any(big):
        out[big] = _lambert_halley_log(np.log(arr[big]))
    return _unwrap(out, scalar)


def lambert_w0_log(log_x):
    """``W(exp(log_x))`` without forming ``exp(log_x)`` for large arguments.

    Used where the Lambert argument is a product of exponentials whose
    logarithm is known in closed form.
    """
    arr, scalar = _as_float_array(log_x, "lambert_w0_log")
    out = np.empty_like(arr)
    big = arr > 2.0
    out[~big] = _lambert_halley(np.exp(arr[~big]))
    if np.any(big):
        out[big] = _lambert_halley_log(arr[big])
    return _unwrap(out, scalar)


# ---------------------------------------------------------------------------
# Modified Bessel functions I0, I1
# ---------------------------------------------------------------------------

def _i_series(x: np.ndarray, order: int) -> np.ndarray:
    q = 0.25 * x * x
    term = np.ones_like(x) if order == 0 else 0.5 * x
    total = term.copy()
    for k in range(1, 200):
        term = term * q / (k * (k + order))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _i_asymptotic_scaled(x: np.ndarray, order: int) -> np.ndarray:
    # e^{-x} I_n(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k a_k(n) / x^k, x >= 15
    mu = 4.0 * order * order
    term = np.ones_like(x)
    total = term.copy()
    prev = np.full_like(x, np.inf)
    for k in range(1, 60):
        term = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        small = np.abs(term)
        # truncate before the asymptotic series starts to diverge
        use = small < prev
        total = total + np.where(use, term, 0.0)
        prev = np.where(use, small, 0.0)
        if np.all(prev <= 1e-17 * np.abs(total)):
            break
    return total / np.sqrt(2.0 * np.pi * x)


def _bessel_scaled(x: np.ndarray, order: int) -> np.ndarray:
    ax = np.abs(x)
    out = np.empty_like(ax)
    low = ax < _BESSEL_SWITCH
    if np.any(low):
        xl = ax[low]
        out[low] = _i_series(xl, order) * np.exp(-xl)
    if np.any(~low):
        out[~low] = _i_asymptotic_scaled(ax[~low], order)
    if order == 1:
        out = np.where(x < 0, -out, out)
    return out


def bessel_i0e(x):
    """Exponentially scaled modified Bessel function ``exp(-|x|) I0(x)``."""
    arr, scalar = _as_float_array(x, "bessel_i0e")
    return _unwrap(_bessel_scaled(arr, 0), scalar)


def bessel_i1e(x):
    """Exponentially scaled modified Bessel function ``exp(-|x|) I1(x)``."""
    arr, scalar = _as_float_array(x, "bessel_i1e")
    return _unwrap(_bessel_scaled(arr, 1), scalar)


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero.

    Relative accuracy is better than ``1e-10`` for all finite ``x`` that do
    not overflow. Raises :class:`DomainError` for non-finite input.
    """
    arr, scalar = _as_float_array(x, "bessel_i0")
    out = _bessel_scaled(arr, 0) * np.exp(np.abs(arr))
    return _unwrap(out, scalar)


def bessel_i1(x):
    """Modified Bessel function of the first kind, order one (odd in ``x``)."""
    arr, scalar = _as_float_array(x, "bessel_i1")
    out = _bessel_scaled(arr, 1) * np.exp(np.abs(arr))
    return _unwrap(out, scalar)


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod (7, 15) quadrature
# ---------------------------------------------------------------------------

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# 15 Kronrod abscissae on [-1, 1] in ascending order, with matching weights.
KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[[13, 11, 9]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]


def _adaptive_gk(
    f: Callable[[np.ndarray], np.ndarray],
    breaks: np.ndarray,
    abs_tol: float,
    rel_tol: float,
    max_evals: int,
    eval_cost: int = 1,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Integrate a (possibly vector-valued) function over ``[breaks[0], breaks[-1]]``.

    ``f`` maps a 1-D array of abscissae of length ``n`` to an array of shape
    ``(n,)`` or ``(n, m)``. All panels that are still open are evaluated in a
    single call per refinement sweep. A panel is accepted once its
    Kronrod-Gauss difference is within its length-proportional share of the
    global tolerance. Returns ``(integral, error, evaluations)``.
    """
    lo, hi = float(breaks[0]), float(breaks[-1])
    span = hi - lo
    a = np.asarray(breaks[:-1], dtype=float)
    b = np.asarray(breaks[1:], dtype=float)
    accepted = None
    accepted_err = None
    evals = 0
    while True:
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        nodes = mid[:, None] + half[:, None] * KRONROD_NODES[None, :]
        fx = np.asarray(f(nodes.ravel()), dtype=float)
        fx = fx.reshape(nodes.shape + fx.shape[1:])
        evals += nodes.size * eval_cost
        kron = np.einsum("ij...,j->i...", fx, KRONROD_WEIGHTS) * _bcast(half, fx.ndim - 2)
        gauss = np.einsum("ij...,j->i...", fx, GAUSS_WEIGHTS) * _bcast(half, fx.ndim - 2)
        err = np.abs(kron - gauss)
        if accepted is None:
            accepted = np.zeros(kron.shape[1:])
            accepted_err = np.zeros(kron.shape[1:])
        total = accepted + kron.sum(axis=0)
        tol = np.maximum(abs_tol, rel_tol * np.abs(total))
        share = _bcast((b - a) / span, kron.ndim - 1)
        ok = err <= tol * share
        if kron.ndim > 1:
            ok = ok.reshape(ok.shape[0], -1).all(axis=1)
        # panels at the resolution floor are accepted as they stand
        ok |= (b - a) <= 64.0 * _EPS * max(abs(lo), abs(hi), span)
        accepted = accepted + kron[ok].sum(axis=0)
        accepted_err = accepted_err + err[ok].sum(axis=0)
        if ok.all():
            return accepted, accepted_err, evals
        if evals >= max_evals:
            estimate = accepted + kron[~ok].sum(axis=0)
            error = accepted_err + err[~ok].sum(axis=0)
            raise ConvergenceError(
                "adaptive quadrature exceeded max_evals",
                estimate=_to_py(estimate),
                error=_to_py(error),
            )
        a_open, b_open = a[~ok], b[~ok]
        m_open = 0.5 * (a_open + b_open)
        a = np.concatenate([a_open, m_open])
        b = np.concatenate([m_open, b_open])
        order = np.argsort(a, kind="stable")
        a, b = a[order], b[order]


def _bcast(v: np.ndarray, extra_dims: int) -> np.ndarray:
    return v.reshape(v.shape + (1,) * extra_dims)


def _to_py(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


def _breakpoints(lo: float, hi: float, panels: int, extra=()) -> np.ndarray:
    pts = set(np.linspace(lo, hi, panels + 1).tolist())
    pts.update(p for p in extra if lo < p < hi)
    return np.array(sorted(pts))


def integrate_1d(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    spec: QuadratureSpec = QuadratureSpec(),
    *,
    points=(),
    panels: int = 1,
) -> float:
    """Adaptive Gauss-Kronrod integral of a vectorised scalar function.

    Parameters
    ----------
    f : callable
        Maps an ndarray of abscissae to an ndarray of the same shape.
    lo, hi : float
        Finite integration limits.
    spec : QuadratureSpec
        Error contract.
    points : sequence of float, optional
        Interior breakpoints (peaks, kinks) that start a new panel.
    panels : int
        Number of equal initial panels.

    Raises
    ------
    ConvergenceError
        If ``spec.max_evals`` is exhausted; carries the best estimate.
    """
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError("integrate_1d: limits must be finite")
    if lo == hi:
        return 0.0
    sign = 1.0
    if hi < lo:
        lo, hi, sign = hi, lo, -1.0
    breaks = _breakpoints(lo, hi, panels, points)
    value, _, _ = _adaptive_gk(f, breaks, spec.abs_tol, spec.rel_tol, spec.max_evals)
    return sign * float(value)


def integrate_polar_2d(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    r_max: float,
    spec: QuadratureSpec = QuadratureSpec(),
    *,
    phi_center: float = 0.0,
    r_points=(),
    r_panels: int = 8,
    phi_panels: int = 16,
) -> float:
    """Integrate ``f(r, phi) r dr dphi`` over the disc ``r <= r_max``.

    The angular integral runs over ``[phi_center - pi, phi_center + pi]`` so
    a feature located at ``phi_center`` sits on a panel boundary from the
    start. Both directions are adaptive; the inner angular integrals for all
    radial nodes of a sweep are done together as one vector-valued integral.

    ``f`` must broadcast: it is called with ``r`` of shape ``(1, m)`` and
    ``phi`` of shape ``(k, 1)``.
    """
    if not (r_max > 0 and math.isfinite(r_max)):
        raise DomainError("integrate_polar_2d: r_max must be finite and > 0")
    # inner error eps per radial node costs at most eps * r_max^2 / 2 outside
    inner_abs = spec.abs_tol / (r_max * r_max)
    phi_breaks = _breakpoints(phi_center - np.pi, phi_center + np.pi, phi_panels)
    used = [0]

    def radial(r: np.ndarray) -> np.ndarray:
        def angular(phi: np.ndarray) -> np.ndarray:
            return f(r[None, :], phi[:, None])

        budget = max(spec.max_evals - used[0], 1)
        inner, _, n = _adaptive_gk(
            angular, phi_breaks, inner_abs, spec.rel_tol, budget, eval_cost=r.size
        )
        used[0] += n
        return r * inner

    r_breaks = _breakpoints(0.0, r_max, r_panels, r_points)
    value, _, _ = _adaptive_gk(radial, r_breaks, spec.abs_tol, spec.rel_tol, spec.max_evals)
    return float(value)
