"""Seeded generators for the two synthetic panel designs, plus the epilepsy
trial covariate builder.

Both synthetic designs draw counts from Poisson laws whose log mean is a
linear predictor with three uniform fixed-effect covariates and standard
normal subject effects; the second design adds a uniform random-slope
covariate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import RngStream
from .exceptions import DataError, ParameterError
from .model import PanelDataset, SubjectBlock

__all__ = [
    "SimTruth",
    "gen_study1",
    "gen_study2",
    "ProgabideRecord",
    "progabide_covariates",
]

_COUNT_CAP = 2**31 - 1

RANDOM_INTERCEPT = "random_intercept"
RANDOM_INTERCEPT_SLOPE = "random_intercept_slope"


@dataclass(frozen=True)
class SimTruth:
    """Ground-truth parameters behind one simulated dataset."""

    beta_true: np.ndarray  # (k,)
    alpha_true: np.ndarray  # (N, l)
    design: str


def _assemble(x, s, mu, n_subjects, n_per, gen) -> list[SubjectBlock]:
    if np.any(mu > _COUNT_CAP):
        raise ParameterError(
            f"Poisson mean exceeds the count cap {_COUNT_CAP}; shrink the coefficients"
        )
    y = gen.poisson(mu)
    blocks = []
    for i in range(n_subjects):
        sl = slice(i * n_per, (i + 1) * n_per)
        blocks.append(SubjectBlock(subject_id=i + 1, y=y[sl], x=x[sl], s=s[sl]))
    return blocks


def gen_study1(
    n_subjects: int = 20,
    n_per: int = 5,
    seed: int = 0,
    *,
    beta_true: Sequence[float] = (1.0, 3.0, 5.0),
    intercept_sd: float = 1.0,
) -> tuple[PanelDataset, SimTruth]:
    """Random-intercept design: three unif(0,1) covariates, N(0,1) intercepts.

    Counts are Poisson with log mean x'beta + alpha_i; the random-effect
    design is the intercept-only column s = (1).  ``beta_true`` and
    ``intercept_sd`` are test hooks, e.g. zeros give unit-rate counts.
    """
    if n_subjects < 1 or n_per < 1:
        raise ParameterError("need n_subjects >= 1 and n_per >= 1")
    gen = RngStream(seed, 0).generator
    n = n_subjects * n_per
    beta = np.asarray(beta_true, dtype=float)
    x = gen.random((n, len(beta)))
    alpha = intercept_sd * gen.standard_normal(n_subjects)
    mu = np.exp(x @ beta + np.repeat(alpha, n_per))
    s = np.ones((n, 1))
    blocks = _assemble(x, s, mu, n_subjects, n_per, gen)
    truth = SimTruth(beta_true=beta, alpha_true=alpha[:, None], design=RANDOM_INTERCEPT)
    return PanelDataset.from_subjects(blocks), truth


def gen_study2(
    n_subjects: int = 20,
    n_per: int = 5,
    seed: int = 0,
    *,
    beta_true: Sequence[float] = (1.0, 3.0, 5.0),
) -> tuple[PanelDataset, SimTruth]:
    """Random intercept plus random slope on an extra unif(0,1) covariate.

    Both subject effects are independent N(0,1); the random-effect rows are
    s = (1, s1).
    """
    if n_subjects < 1 or n_per < 1:
        raise ParameterError("need n_subjects >= 1 and n_per >= 1")
    gen = RngStream(seed, 0).generator
    n = n_subjects * n_per
    beta = np.asarray(beta_true, dtype=float)
    x = gen.random((n, len(beta)))
    s1 = gen.random(n)
    alpha = gen.standard_normal((n_subjects, 2))
    eta = x @ beta + alpha[:, 0].repeat(n_per) + s1 * alpha[:, 1].repeat(n_per)
    mu = np.exp(eta)
    s = np.column_stack([np.ones(n), s1])
    blocks = _assemble(x, s, mu, n_subjects, n_per, gen)
    truth = SimTruth(beta_true=beta, alpha_true=alpha, design=RANDOM_INTERCEPT_SLOPE)
    return PanelDataset.from_subjects(blocks), truth


@dataclass(frozen=True)
class ProgabideRecord:
    """One clinic visit: biweekly seizure count plus the raw covariates."""

    subject: object
    seizures: int
    baseline: float  # 8-week pre-randomization seizure count
    age: float
    treatment: int  # 1 = active drug, 0 = placebo
    visit: int  # 1..4


def progabide_covariates(
    records: Sequence[ProgabideRecord], random_model: str = "intercept"
) -> PanelDataset:
    """Build the fixed-effect design (1, Base, Trt, LnAge, Visit4, Base.Trt).

    Base is ln(baseline / 4), the log biweekly baseline rate; Visit4 flags
    the final clinic visit.  ``random_model`` selects the random-effect rows:
    ``"intercept"`` gives s = (1), ``"intercept_visit"`` gives s = (1, Visit4).
    Unlike the synthetic designs, an explicit intercept column is included.
    """
    if random_model not in ("intercept", "intercept_visit"):
        raise ParameterError(f"unknown random_model {random_model!r}")
    rows: dict = {}
    for idx, rec in enumerate(records):
        if rec.baseline <= 0:
            raise DataError(f"record {idx}: baseline count must be positive, got {rec.baseline}")
        if rec.age <= 0:
            raise DataError(f"record {idx}: age must be positive, got {rec.age}")
        if rec.visit not in (1, 2, 3, 4):
            raise DataError(f"record {idx}: visit must be 1..4, got {rec.visit}")
        if rec.seizures < 0:
            raise DataError(f"record {idx}: seizure count must be nonnegative")
        base = math.log(rec.baseline / 4.0)
        trt = float(rec.treatment != 0)
        visit4 = float(rec.visit == 4)
        xrow = [1.0, base, trt, math.log(rec.age), visit4, base * trt]
        srow = [1.0] if random_model == "intercept" else [1.0, visit4]
        entry = rows.setdefault(rec.subject, ([], [], []))
        entry[0].append(int(rec.seizures))
        entry[1].append(xrow)
        entry[2].append(srow)
    blocks = [
        SubjectBlock(subject_id=sid, y=np.array(ys), x=np.array(xs), s=np.array(ss))
        for sid, (ys, xs, ss) in rows.items()
    ]
    return PanelDataset.from_subjects(blocks)
