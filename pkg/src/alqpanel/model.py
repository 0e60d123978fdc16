"""Panel-data containers, priors, and the shared quantile-loss formulas.

Data is stored in long format grouped by subject: every Gibbs update walks
per-subject blocks, so each subject's rows stay contiguous and the stacked
views (``x_all``, ``s_all``, ``counts``) are built once and cached.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Sequence

import numpy as np

from .exceptions import ParameterError

__all__ = [
    "SubjectBlock",
    "PanelDataset",
    "QuantileSpec",
    "PriorConfig",
    "MixtureConstants",
    "ChainState",
    "check_loss",
    "mixture_constants",
    "validate_dataset",
]


def check_loss(u, p: float):
    """Quantile loss rho_p(u) = u * (p - 1{u < 0}); nonnegative, zero at u = 0."""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"quantile level must lie in (0, 1), got {p}")
    u = np.asarray(u, dtype=float)
    out = u * (p - (u < 0.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MixtureConstants:
    """Constants of the normal-exponential representation of the AL law.

    theta = (1 - 2p) / (p(1-p)) and tau = sqrt(2 / (p(1-p))); consequently
    tau^2 * p * (1-p) = 2 exactly.
    """

    theta: float
    tau: float


def mixture_constants(p: float) -> MixtureConstants:
    """Location/scale constants for the AL mixture at quantile level ``p``."""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"quantile level must lie in (0, 1), got {p}")
    pq = p * (1.0 - p)
    return MixtureConstants(theta=(1.0 - 2.0 * p) / pq, tau=np.sqrt(2.0 / pq))


@dataclass
class SubjectBlock:
    """Repeated measurements for one subject: counts plus covariate rows."""

    subject_id: Hashable
    y: np.ndarray  # (n_i,) integer counts
    x: np.ndarray  # (n_i, k) fixed-effect covariates
    s: np.ndarray  # (n_i, l) random-effect covariates

    def __post_init__(self):
        self.y = np.atleast_1d(np.asarray(self.y))
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.s = np.atleast_2d(np.asarray(self.s, dtype=float))

    @property
    def n_obs(self) -> int:
        return len(self.y)


@dataclass
class PanelDataset:
    """Long-format panel of counts with per-subject blocks.

    ``k`` is the fixed-effect dimension and ``l`` the random-effect dimension.
    No intercept column is ever injected; callers that want one must include a
    constant column in ``x`` (or ``s``) themselves.
    """

    subjects: list[SubjectBlock]
    k: int
    l: int

    @classmethod
    def from_subjects(cls, subjects: Sequence[SubjectBlock]) -> "PanelDataset":
        subjects = list(subjects)
        if not subjects:
            raise ParameterError("dataset needs at least one subject")
        return cls(subjects=subjects, k=subjects[0].x.shape[1], l=subjects[0].s.shape[1])

    @property
    def n_subjects(self) -> int:
        return len(self.subjects)

    @cached_property
    def n_total(self) -> int:
        return int(sum(b.n_obs for b in self.subjects))

    @cached_property
    def counts(self) -> np.ndarray:
        return np.concatenate([np.asarray(b.y, dtype=np.int64) for b in self.subjects])

    @cached_property
    def x_all(self) -> np.ndarray:
        return np.ascontiguousarray(np.vstack([b.x for b in self.subjects]))

    @cached_property
    def s_all(self) -> np.ndarray:
        return np.ascontiguousarray(np.vstack([b.s for b in self.subjects]))

    @cached_property
    def block_starts(self) -> np.ndarray:
        """Offsets of each subject block in the stacked arrays, plus the end."""
        sizes = [b.n_obs for b in self.subjects]
        return np.concatenate([[0], np.cumsum(sizes)]).astype(np.intp)

    @cached_property
    def subject_index(self) -> np.ndarray:
        """Per-observation subject position (0-based) into ``subjects``."""
        return np.repeat(np.arange(self.n_subjects), [b.n_obs for b in self.subjects])

    def subject_ids(self) -> list:
        return [b.subject_id for b in self.subjects]


def validate_dataset(data: PanelDataset) -> list[str]:
    """Collect every structural violation; an empty report means the dataset is valid.

    Never raises: callers decide what to do with the report.
    """
    report: list[str] = []
    for b in data.subjects:
        sid = b.subject_id
        if b.n_obs < 1:
            report.append(f"subject {sid}: empty block (no observations)")
            continue
        if b.x.shape[0] != b.n_obs or b.s.shape[0] != b.n_obs:
            report.append(
                f"subject {sid}: row-count mismatch (y has {b.n_obs}, "
                f"x has {b.x.shape[0]}, s has {b.s.shape[0]})"
            )
        if b.x.shape[1] != data.k:
            report.append(
                f"subject {sid}: dimension mismatch, x rows have length {b.x.shape[1]}, expected k={data.k}"
            )
        if b.s.shape[1] != data.l:
            report.append(
                f"subject {sid}: dimension mismatch, s rows have length {b.s.shape[1]}, expected l={data.l}"
            )
        y = np.asarray(b.y)
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(y == np.floor(y)):
                rows = np.nonzero(y != np.floor(y))[0]
                report.append(f"subject {sid}: non-integer count at row {rows[0]}")
        neg = np.nonzero(y < 0)[0]
        if neg.size:
            report.append(f"subject {sid}: negative count at row {neg[0]} (y={y[neg[0]]})")
    n_tot = sum(b.n_obs for b in data.subjects)
    if n_tot < data.k:
        report.append(f"total observations {n_tot} < fixed-effect dimension k={data.k}")
    return report


@dataclass
class QuantileSpec:
    """Quantile level plus jitter/chain configuration for one fit."""

    p: float
    zeta: float = 1e-5
    m_jitter: int = 20
    iterations: int = 12000
    burn_in: int = 2000
    master_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ParameterError(f"quantile level must lie in (0, 1), got {self.p}")
        if not 0.0 < self.zeta < 1.0:
            raise ParameterError(f"latent floor zeta must lie in (0, 1), got {self.zeta}")
        if self.m_jitter < 2:
            raise ParameterError("m_jitter must be >= 2 (pooled variance divides by M-1)")
        if self.burn_in >= self.iterations:
            raise ParameterError(
                f"burn_in ({self.burn_in}) must be smaller than iterations ({self.iterations})"
            )
        if self.master_seed < 0:
            raise ParameterError("master_seed must be a nonnegative integer")


def _check_ig_pair(name: str, shape: float, scale: float) -> None:
    improper = shape == -0.5 and scale == 0.0
    proper = shape > 0.0 and scale > 0.0
    if not (improper or proper):
        raise ParameterError(
            f"{name} hyperparameters must be proper (shape>0, scale>0) or the "
            f"improper pair (-0.5, 0); got ({shape}, {scale})"
        )


@dataclass
class PriorConfig:
    """Hyperparameters: Gamma(a1, a2) on the lasso rate, IG on phi^2 and sigma.

    Defaults follow the weak-information choice: improper IG(-0.5, 0) on both
    variance-like scales and Gamma(0.01, 0.01) on the lasso rate.
    """

    a1: float = 0.01
    a2: float = 0.01
    b1: float = -0.5
    b2: float = 0.0
    c1: float = -0.5
    c2: float = 0.0

    def __post_init__(self):
        if self.a1 <= 0 or self.a2 <= 0:
            raise ParameterError(f"(a1, a2) must be positive, got ({self.a1}, {self.a2})")
        _check_ig_pair("(b1, b2)", self.b1, self.b2)
        _check_ig_pair("(c1, c2)", self.c1, self.c2)


@dataclass
class ChainState:
    """Full parameter set of one Gibbs iteration.

    ``v`` and ``z`` are stacked per-observation vectors aligned with the
    dataset's long-format order.
    """

    beta: np.ndarray  # (k,)
    alpha: np.ndarray  # (N, l)
    v: np.ndarray  # (n_total,)
    sigma: float
    phi2: float
    g2: np.ndarray  # (k,)
    lambda2: float
    z: np.ndarray = field(default=None)  # (n_total,)

    def assert_valid(self) -> None:
        """Positivity and finiteness invariants; raises AssertionError on violation."""
        assert self.sigma > 0.0, "sigma must be positive"
        assert self.phi2 > 0.0, "phi2 must be positive"
        assert self.lambda2 > 0.0, "lambda2 must be positive"
        assert np.all(self.v > 0.0), "all mixture latents v must be positive"
        assert np.all(self.g2 > 0.0), "all lasso scales g2 must be positive"
        assert np.all(np.isfinite(self.beta)), "beta must be finite"
        assert np.all(np.isfinite(self.alpha)), "alpha must be finite"
        if self.z is not None:
            assert np.all(np.isfinite(self.z)), "latent z must be finite"

    def copy(self) -> "ChainState":
        return ChainState(
            beta=self.beta.copy(),
            alpha=self.alpha.copy(),
            v=self.v.copy(),
            sigma=self.sigma,
            phi2=self.phi2,
            g2=self.g2.copy(),
            lambda2=self.lambda2,
            z=None if self.z is None else self.z.copy(),
        )
