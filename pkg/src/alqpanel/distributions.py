"""Seeded random sampling and log densities for every family the sampler touches.

All draws flow through an :class:`RngStream`, a thin wrapper over a
counter-based Philox generator keyed by ``(seed, stream_id)``.  Distinct
stream ids derived from one master seed give statistically independent
sequences, which is what makes jitter replicates and parallel chains
reproducible regardless of scheduling.

Densities are only ever evaluated in log space; exponents in this model
routinely reach +-10^3.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .exceptions import NumericError, ParameterError
from .model import check_loss

__all__ = [
    "RngStream",
    "GigHalfParams",
    "sample_gig_half",
    "sample_gaussian_from_precision",
    "sample_gamma",
    "sample_inverse_gamma",
    "sample_uniform01",
    "ald_logpdf",
]


@dataclass
class RngStream:
    """One reproducible random stream, keyed by ``(seed, stream_id)``.

    Single-owner: share a stream between concurrent consumers and you lose
    reproducibility.  Derive a fresh stream id per replicate/chain instead.
    """

    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise ParameterError("seed and stream_id must be nonnegative integers")
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream_id),))
        self.generator = np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class GigHalfParams:
    """Parameters of the GIG law with index 1/2.

    Density kernel on x > 0: x^{-1/2} exp(-(rho1/x + rho2*x)/2).  rho1 = 0 is
    the degenerate limit Gamma(shape 1/2, rate rho2/2), still a proper law.
    """

    rho1: float
    rho2: float

    def __post_init__(self):
        if self.rho2 <= 0.0 or not np.isfinite(self.rho2):
            raise ParameterError(f"rho2 must be positive and finite, got {self.rho2}")
        if self.rho1 < 0.0 or not np.isfinite(self.rho1):
            raise ParameterError(f"rho1 must be nonnegative and finite, got {self.rho1}")


def _gig_half(rho1: np.ndarray, rho2: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """Vector draws X_i ~ GIG(1/2, rho1_i, rho2_i).

    Route: if W ~ InverseGaussian(mu, lam) with mu = sqrt(rho2/rho1) and
    lam = rho2, then 1/W has the target law.  The Michael-Schucany-Haas
    candidate root is evaluated as mu / D with D = 1 + t + sqrt(t(t+2)) and
    t = y / (2 sqrt(rho1 rho2)), a form with no large-t cancellation, so the
    draw is simply sqrt(rho1/rho2) * D (accepted) or sqrt(rho1/rho2) / D.
    Entries with rho1 == 0 reuse the chi-square draw as y/rho2, which is
    exactly the Gamma(1/2, rate rho2/2) limit.

    Consumes exactly 2n numbers from ``gen`` for n entries.
    """
    rho1, rho2 = np.broadcast_arrays(np.asarray(rho1, float), np.asarray(rho2, float))
    y = gen.standard_normal(rho1.shape) ** 2
    u = gen.random(rho1.shape)
    out = np.empty(rho1.shape)

    pos = rho1 > 0.0
    if np.any(pos):
        r1, r2, yp, up = rho1[pos], rho2[pos], y[pos], u[pos]
        t = yp / (2.0 * np.sqrt(r1 * r2))
        # sqrt(t(t+2)) would overflow t^2 past ~1e154; beyond that D -> 2t + 2
        ts = np.minimum(t, 1e150)
        d = 1.0 + t + np.sqrt(ts * (ts + 2.0))
        big = t > 1e150
        if np.any(big):
            d[big] = 2.0 * t[big] + 2.0
        accept = up * (d + 1.0) <= d
        out[pos] = np.sqrt(r1 / r2) * np.where(accept, d, 1.0 / d)
    deg = ~pos
    if np.any(deg):
        out[deg] = y[deg] / rho2[deg]
    return out


def sample_gig_half(params: GigHalfParams, rng: RngStream, size: int | None = None):
    """Draw from GIG(1/2, rho1, rho2); scalar unless ``size`` is given."""
    shape = () if size is None else (int(size),)
    draws = _gig_half(
        np.full(shape, params.rho1), np.full(shape, params.rho2), rng.generator
    )
    return float(draws) if size is None else draws


def sample_gaussian_from_precision(
    precision: np.ndarray,
    linear_term: np.ndarray,
    rng: RngStream,
    size: int | None = None,
):
    """Draw from N(P^{-1} c, P^{-1}) given precision P and linear term c.

    One Cholesky factorization services both the mean solve and the noise;
    the precision is never explicitly inverted.  A non-positive-definite
    input raises :class:`NumericError` carrying the failing pivot.
    """
    prec = np.asarray(precision, dtype=float)
    lin = np.asarray(linear_term, dtype=float)
    if prec.ndim != 2 or prec.shape[0] != prec.shape[1]:
        raise ParameterError(f"precision must be a square matrix, got shape {prec.shape}")
    d = prec.shape[0]
    if lin.shape != (d,):
        raise ParameterError(f"linear term must have shape ({d},), got {lin.shape}")
    if not np.allclose(prec, prec.T, rtol=1e-8, atol=0.0):
        raise ParameterError("precision matrix must be symmetric")

    chol, info = lapack.dpotrf(prec, lower=1)
    if info != 0:
        raise NumericError(
            f"precision matrix is not positive definite (failing pivot {info})",
            pivot_index=int(info),
        )
    mean, info = lapack.dpotrs(chol, lin[:, None], lower=1)
    if info != 0:  # pragma: no cover - dpotrs only fails on bad arguments
        raise NumericError(f"triangular solve failed (info {info})", pivot_index=int(info))
    mean = mean[:, 0]

    n = 1 if size is None else int(size)
    eps = rng.generator.standard_normal((d, n))
    # L^T x = eps gives x with covariance (L L^T)^{-1} = P^{-1}
    noise = solve_triangular(chol, eps, lower=True, trans="T")
    draws = mean[None, :] + noise.T
    return draws[0] if size is None else draws


def sample_gamma(shape: float, rate: float, rng: RngStream, size: int | None = None):
    """Gamma draw with density proportional to x^{shape-1} exp(-rate*x)."""
    if shape <= 0.0 or rate <= 0.0:
        raise ParameterError(f"gamma parameters must be positive, got shape={shape}, rate={rate}")
    draws = rng.generator.gamma(shape, 1.0 / rate, size=size)
    return float(draws) if size is None else draws


def sample_inverse_gamma(shape: float, scale: float, rng: RngStream, size: int | None = None):
    """Inverse-gamma draw: density proportional to x^{-shape-1} exp(-scale/x).

    Equivalently the reciprocal of a Gamma(shape, rate=scale) draw.
    """
    if shape <= 0.0 or scale <= 0.0:
        raise ParameterError(
            f"inverse-gamma draw needs shape > 0 and scale > 0, got shape={shape}, scale={scale}"
        )
    draws = 1.0 / rng.generator.gamma(shape, 1.0 / scale, size=size)
    return float(draws) if size is None else draws


def sample_uniform01(rng: RngStream, size: int | None = None):
    """Uniform draw on [0, 1)."""
    draws = rng.generator.random(size=size)
    return float(draws) if size is None else draws


def ald_logpdf(y, mu, sigma: float, p: float):
    """Log density of the asymmetric Laplace law AL(mu, sigma, p) at y.

    log f = log(p(1-p)/sigma) - rho_p((y - mu)/sigma).
    """
    if sigma <= 0.0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if not 0.0 < p < 1.0:
        raise ParameterError(f"quantile level must lie in (0, 1), got {p}")
    u = (np.asarray(y, dtype=float) - np.asarray(mu, dtype=float)) / sigma
    out = np.log(p * (1.0 - p) / sigma) - check_loss(u, p)
    return float(out) if np.ndim(out) == 0 else out
