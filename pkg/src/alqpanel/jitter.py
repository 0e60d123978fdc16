"""The count-to-latent pipeline: uniform jittering, the log transform, and
the integer quantile prediction rule.

Counts y are made continuous as y* = y + u with u ~ unif[0, 1); the latent
scale is z = ln(y* - p) when y* > p and ln(zeta) otherwise (the boundary
y* = p belongs to the floor branch).  Predicted integer quantiles come back
through the ceiling rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import RngStream
from .exceptions import NumericError, ParameterError

__all__ = [
    "JitteredLatent",
    "jitter_counts",
    "latent_transform",
    "predict_count_quantile",
]

# exp() overflows IEEE doubles just above 709; fail loudly before that
_EXP_OVERFLOW = 700.0


@dataclass(frozen=True)
class JitteredLatent:
    """Latent vector for one jitter replicate (h runs from 1 to M)."""

    z: np.ndarray
    jitter_index: int


def jitter_counts(y, rng: RngStream) -> np.ndarray:
    """Add fresh unif[0, 1) noise to integer counts, giving y* in [y, y+1).

    New noise is drawn on every call; jitter values are throwaways and are
    never reused across iterations.
    """
    y = np.asarray(y)
    if np.any(y < 0):
        raise ParameterError("counts must be nonnegative")
    return y + rng.generator.random(y.shape)


def latent_transform(y_star, p: float, zeta: float):
    """Monotone map to the latent scale: ln(y*-p) if y* > p, else ln(zeta)."""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"quantile level must lie in (0, 1), got {p}")
    if zeta <= 0.0:
        raise ParameterError(f"zeta must be positive, got {zeta}")
    y_star = np.asarray(y_star, dtype=float)
    gap = y_star - p
    out = np.log(np.where(gap > 0.0, gap, zeta))
    return float(out) if out.ndim == 0 else out


def predict_count_quantile(beta, alpha_i, x, s, p: float) -> int:
    """Integer p-quantile prediction: ceil(p + exp(x'beta + s'alpha) - 1), floored at 0."""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"quantile level must lie in (0, 1), got {p}")
    eta = float(np.dot(x, beta) + np.dot(s, alpha_i))
    if not np.isfinite(eta):
        raise NumericError(f"linear predictor is not finite: {eta}")
    if eta > _EXP_OVERFLOW:
        raise NumericError(f"linear predictor {eta} overflows exp()")
    return max(0, math.ceil(p + math.exp(eta) - 1.0))
