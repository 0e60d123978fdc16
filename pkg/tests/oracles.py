"""Quadrature oracles used by the test suite.

Everything here deliberately avoids the sampling code paths it checks:
distribution oracles come from normalized trapezoid quadrature of density
kernels written down from first principles.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid


def positive_grid(hi: float, lo: float = 1e-12, n_log: int = 4000, n_lin: int = 200_000):
    """Dense grid on (0, hi]: geometric near zero (integrable singularities),
    linear through the bulk."""
    mid = min(hi / 10.0, 1.0)
    return np.unique(
        np.concatenate([np.geomspace(lo, mid, n_log), np.linspace(mid, hi, n_lin)])
    )


def log_grid(lo: float, hi: float, n: int = 2_000_001) -> np.ndarray:
    """Geometric grid; resolves heavy tails spanning many decades."""
    return np.geomspace(lo, hi, n)


def normalized_cdf(log_kernel, grid: np.ndarray) -> np.ndarray:
    """CDF of exp(log_kernel) on the grid, normalized by the grid integral."""
    logk = np.asarray(log_kernel(grid), dtype=float)
    w = np.exp(logk - logk.max())
    cdf = cumulative_trapezoid(w, grid, initial=0.0)
    return cdf / cdf[-1]


def kernel_moment(log_kernel, grid: np.ndarray, power: int = 1) -> float:
    """E[X^power] under the normalized kernel, by quadrature."""
    logk = np.asarray(log_kernel(grid), dtype=float)
    w = np.exp(logk - logk.max())
    return trapezoid(w * grid**power, grid) / trapezoid(w, grid)


def ks_distance(draws, grid: np.ndarray, cdf_grid: np.ndarray) -> float:
    """Two-sided Kolmogorov-Smirnov distance between draws and a grid CDF."""
    draws = np.sort(np.asarray(draws, dtype=float))
    cdf_at = np.interp(draws, grid, cdf_grid, left=0.0, right=1.0)
    n = len(draws)
    steps_hi = np.arange(1, n + 1) / n
    steps_lo = np.arange(0, n) / n
    return float(max(np.abs(cdf_at - steps_hi).max(), np.abs(cdf_at - steps_lo).max()))


def gig_half_log_kernel(rho1: float, rho2: float):
    """log of x^{-1/2} exp(-(rho1/x + rho2 x)/2) on x > 0."""

    def logk(x):
        x = np.asarray(x, dtype=float)
        return -0.5 * np.log(x) - 0.5 * (rho1 / x + rho2 * x)

    return logk


def gamma_log_kernel(shape: float, rate: float):
    def logk(x):
        x = np.asarray(x, dtype=float)
        return (shape - 1.0) * np.log(x) - rate * x

    return logk


def inverse_gamma_log_kernel(shape: float, scale: float):
    def logk(x):
        x = np.asarray(x, dtype=float)
        return -(shape + 1.0) * np.log(x) - scale / x

    return logk


def quantile_from_cdf(grid: np.ndarray, cdf: np.ndarray, q: float) -> float:
    return float(np.interp(q, cdf, grid))
