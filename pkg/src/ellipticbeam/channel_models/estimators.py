"""Empirical estimators for transmittance samples: moments, ECDF, KDE, KS distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from ..errors import DomainError

__all__ = [
    "GRID_POINTS",
    "standard_grid",
    "extended_grid",
    "StepFunction",
    "ecdf",
    "exceedance",
    "silverman_bandwidth",
    "kde",
    "moment_with_se",
    "ks_distance",
]

GRID_POINTS = 512
_FINE_POINTS = 4097
_MIN_BANDWIDTH = 1e-6


def standard_grid() -> np.ndarray:
    """Uniform 512-point grid on [0, 1]."""
    return np.linspace(0.0, 1.0, GRID_POINTS)


def extended_grid(upper: float = 1.2) -> np.ndarray:
    """The standard grid continued with the same spacing up to ``upper``."""
    step = 1.0 / (GRID_POINTS - 1)
    n = int(np.floor(upper / step + 1e-9)) + 1
    return np.arange(n) * step


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous step function ``F(x) = #{s <= x} / n`` (or its complement)."""

    support: np.ndarray
    complement: bool = False

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        frac = np.searchsorted(self.support, x, side="right") / self.support.size
        return 1.0 - frac if self.complement else frac


def _as_samples(samples, minimum: int) -> np.ndarray:
    s = np.asarray(samples, dtype=float).ravel()
    if s.size < minimum:
        raise DomainError(f"need at least {minimum} samples, got {s.size}")
    if not np.all(np.isfinite(s)):
        raise DomainError("samples must be finite")
    return s


def ecdf(samples) -> StepFunction:
    """Empirical distribution function of ``samples``."""
    s = np.sort(_as_samples(samples, 1))
    s.setflags(write=False)
    return StepFunction(s)


def exceedance(samples) -> StepFunction:
    """Empirical exceedance ``1 - ECDF``."""
    return StepFunction(ecdf(samples).support, complement=True)


def silverman_bandwidth(samples) -> float:
    """``0.9 min(std, IQR/1.34) n^(-1/5)``, falling back to whichever spread is nonzero."""
    s = _as_samples(samples, 2)
    std = float(np.std(s, ddof=1))
    q75, q25 = np.percentile(s, [75, 25])
    iqr = float(q75 - q25) / 1.34
    spread = min(std, iqr) if iqr > 0 else std
    return max(0.9 * spread * s.size ** (-0.2), _MIN_BANDWIDTH)


def _linear_bin(samples: np.ndarray, fine: np.ndarray) -> np.ndarray:
    step = fine[1] - fine[0]
    pos = np.clip(samples, fine[0], fine[-1]) / step
    lo = np.minimum(np.floor(pos).astype(np.intp), fine.size - 2)
    frac = pos - lo
    weights = np.bincount(lo, weights=1.0 - frac, minlength=fine.size)
    weights += np.bincount(lo + 1, weights=frac, minlength=fine.size)
    return weights


def kde(samples, bandwidth: float | None = None, grid: np.ndarray | None = None):
    """Gaussian kernel density on [0, 1] with reflection at both boundaries.

    Each grid value is the average of the density over the grid cell around
    that node (half cells at the two ends), so the trapezoid integral over
    the grid equals the kernel mass inside [0, 1]. Samples are linearly
    binned onto a fine grid before the kernel sum.

    Returns
    -------
    grid, density : ndarray
    """
    s = _as_samples(samples, 2)
    h = silverman_bandwidth(s) if bandwidth is None else float(bandwidth)
    if not h > 0:
        raise DomainError("bandwidth must be > 0")
    grid = standard_grid() if grid is None else np.asarray(grid, dtype=float)
    edges = np.concatenate(([grid[0]], 0.5 * (grid[1:] + grid[:-1]), [grid[-1]]))

    fine = np.linspace(0.0, 1.0, _FINE_POINTS)
    weights = _linear_bin(s, fine)
    keep = weights > 0
    z, w = fine[keep], weights[keep]

    e = edges[:, None]
    cdf = ndtr((e - z) / h) + ndtr((e + z) / h) + ndtr((e - 2.0 + z) / h)
    mass = np.diff(cdf @ w) / s.size
    width = np.diff(edges)
    density = np.maximum(mass / width, 0.0)
    return grid, density


def moment_with_se(values) -> tuple[float, float]:
    """Sample mean and its standard error ``std(ddof=1) / sqrt(n)``."""
    v = np.asarray(values, dtype=float)
    mean = float(np.mean(v))
    se = float(np.std(v, ddof=1) / np.sqrt(v.size)) if v.size > 1 else float("nan")
    return mean, se


def ks_distance(samples, cdf, lower: float = 0.0, upper: float = 1.0) -> float:
    """Kolmogorov-Smirnov distance between the ECDF of ``samples`` and ``cdf`` on [lower, upper]."""
    s = np.sort(_as_samples(samples, 1))
    n = s.size
    inside = (s >= lower) & (s <= upper)
    idx = np.nonzero(inside)[0]
    f = np.asarray(cdf(s[idx]), dtype=float)
    # ECDF jumps from idx/n to (last index of that value + 1)/n at each point
    above = np.searchsorted(s, s[idx], side="right") / n
    below = np.searchsorted(s, s[idx], side="left") / n
    dist = max(np.max(np.abs(above - f), initial=0.0), np.max(np.abs(below - f), initial=0.0))
    for x in (lower, upper):
        fn = np.searchsorted(s, x, side="right") / n
        dist = max(dist, abs(fn - float(cdf(np.array([x]))[0])))
    return float(dist)
