"""Blocked Gibbs sampler for the latent-scale quantile regression model.

One sweep executes eight updates in fixed order: refresh the jittered latent
z, then draw the mixture latents v, the AL scale sigma, the fixed effects
beta (lasso-shrunk), the lasso scales g^2, the lasso rate lambda^2, the
per-subject random effects alpha, and the random-effect variance phi^2.
Fixed and random effects are drawn as blocks from their exact Gaussian
conditionals, each conditioned on the other.

Two sigma conditionals are available.  The default is consistent with the
full hierarchical joint (the exponential mixing density contributes both its
1/sigma normalization and its exp(-v/sigma) factor), giving shape
3*n_tot/2 + c1 with sum(v) in the scale.  ``paper_literal_sigma`` switches
to the reduced variant (shape n_tot/2 + c1, no sum(v) term) that drops those
factors; it is kept only for comparison runs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .distributions import (
    RngStream,
    _gig_half,
    ald_logpdf,
    sample_gamma,
    sample_gaussian_from_precision,
    sample_inverse_gamma,
)
from .exceptions import ChainError, NumericError, ParameterError
from .jitter import jitter_counts, latent_transform
from .model import (
    ChainState,
    MixtureConstants,
    PanelDataset,
    PriorConfig,
    QuantileSpec,
    mixture_constants,
)

__all__ = [
    "GibbsConfig",
    "ChainOutput",
    "update_latent_z",
    "update_v",
    "update_sigma",
    "update_beta",
    "update_g2",
    "update_lambda2",
    "update_alpha",
    "update_phi2",
    "sigma_conditional_params",
    "lambda2_conditional_params",
    "phi2_conditional_params",
    "initial_state",
    "run_chain",
]

# variance-like draws below this are resampled once, then abort the chain
_FLOOR = 1e-300


@dataclass
class GibbsConfig:
    """Chain-length bookkeeping for one Gibbs run.

    ``iterations`` counts total sweeps including burn-in, so the number of
    recorded draws is floor((iterations - burn_in) / thin).
    """

    iterations: int = 12000
    burn_in: int = 2000
    thin: int = 1
    record_latents: bool = False
    paper_literal_sigma: bool = False

    def __post_init__(self):
        if self.burn_in < 0 or self.burn_in >= self.iterations:
            raise ParameterError(
                f"need 0 <= burn_in < iterations, got burn_in={self.burn_in}, "
                f"iterations={self.iterations}"
            )
        if self.thin < 1:
            raise ParameterError(f"thin must be >= 1, got {self.thin}")

    @property
    def n_recorded(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


@dataclass
class ChainOutput:
    """Recorded post-burn-in draws of one chain, thinned, plus deviances.

    ``plugin_z`` is one extra jittered latent drawn from the chain's own
    stream after the final sweep; it fixes the latent scale when deviance is
    re-evaluated at the posterior means (DIC and plug-in NLL both use it).
    """

    p: float
    jitter_index: int
    iterations: int
    burn_in: int
    thin: int
    iteration_index: np.ndarray  # (R,) original sweep numbers, 1-based
    beta: np.ndarray  # (R, k)
    alpha: np.ndarray  # (R, N, l)
    sigma: np.ndarray  # (R,)
    phi2: np.ndarray  # (R,)
    g2: np.ndarray  # (R, k)
    lambda2: np.ndarray  # (R,)
    deviance: np.ndarray  # (R,)
    plugin_z: np.ndarray  # (n_total,)
    z: np.ndarray | None = None  # (R, n_total) when latents are recorded
    v: np.ndarray | None = None  # (R, n_total) when latents are recorded

    @property
    def n_recorded(self) -> int:
        return len(self.sigma)

    def states(self) -> Iterator[ChainState]:
        """Recorded draws as ChainState snapshots (latents where recorded)."""
        for i in range(self.n_recorded):
            yield ChainState(
                beta=self.beta[i],
                alpha=self.alpha[i],
                v=self.v[i] if self.v is not None else np.ones(1),
                sigma=float(self.sigma[i]),
                phi2=float(self.phi2[i]),
                g2=self.g2[i],
                lambda2=float(self.lambda2[i]),
                z=self.z[i] if self.z is not None else None,
            )


def _random_effect_rows(dataset: PanelDataset, alpha: np.ndarray) -> np.ndarray:
    """Per-observation s_ij' alpha_i, stacked in dataset order."""
    return np.einsum("ij,ij->i", dataset.s_all, alpha[dataset.subject_index])


def _refloor(draws: np.ndarray, redraw, what: str) -> np.ndarray:
    """Resample entries below the positivity floor once; error if they persist."""
    bad = draws < _FLOOR
    if np.any(bad):
        draws = draws.copy()
        draws[bad] = redraw(bad)
        if np.any(draws < _FLOOR):
            raise NumericError(f"{what} draw underflowed the positivity floor twice")
    return draws


def update_latent_z(dataset: PanelDataset, p: float, zeta: float, rng: RngStream) -> np.ndarray:
    """Step 1: fresh jitter, then the monotone transform to the latent scale."""
    return latent_transform(jitter_counts(dataset.counts, rng), p, zeta)


def update_v(
    state: ChainState, dataset: PanelDataset, constants: MixtureConstants, rng: RngStream
) -> np.ndarray:
    """Step 2: mixture latents v_ij ~ GIG(1/2, resid^2/(tau^2 sigma), theta^2/(tau^2 sigma) + 2/sigma)."""
    tau2_sigma = constants.tau**2 * state.sigma
    resid = state.z - dataset.x_all @ state.beta - _random_effect_rows(dataset, state.alpha)
    rho1 = resid * resid / tau2_sigma
    rho2 = constants.theta**2 / tau2_sigma + 2.0 / state.sigma
    rho2 = np.full_like(rho1, rho2)
    draws = _gig_half(rho1, rho2, rng.generator)
    return _refloor(draws, lambda bad: _gig_half(rho1[bad], rho2[bad], rng.generator), "v")


def sigma_conditional_params(
    state: ChainState,
    dataset: PanelDataset,
    constants: MixtureConstants,
    priors: PriorConfig,
    paper_literal: bool = False,
) -> tuple[float, float]:
    """Inverse-gamma (shape, scale) of the sigma conditional.

    Joint-consistent form: shape = 3*n_tot/2 + c1 and the scale picks up
    sum(v) from the exponential mixing law.  The literal reduced variant
    omits both.
    """
    n_tot = dataset.n_total
    resid = (
        state.z
        - dataset.x_all @ state.beta
        - _random_effect_rows(dataset, state.alpha)
        - constants.theta * state.v
    )
    quad = float(np.sum(resid * resid / state.v)) / (2.0 * constants.tau**2)
    if paper_literal:
        return 0.5 * n_tot + priors.c1, quad + priors.c2
    return 1.5 * n_tot + priors.c1, quad + float(np.sum(state.v)) + priors.c2


def update_sigma(
    state: ChainState,
    dataset: PanelDataset,
    constants: MixtureConstants,
    priors: PriorConfig,
    rng: RngStream,
    paper_literal: bool = False,
) -> float:
    """Step 3: draw the AL scale sigma from its inverse-gamma conditional."""
    shape, scale = sigma_conditional_params(state, dataset, constants, priors, paper_literal)
    if shape <= 0.0:
        raise ParameterError(
            f"sigma conditional shape {shape} is not positive; the dataset is too "
            "small for these priors"
        )
    draw = sample_inverse_gamma(shape, scale, rng)
    if draw < _FLOOR:
        draw = sample_inverse_gamma(shape, scale, rng)
        if draw < _FLOOR:
            raise NumericError("sigma draw underflowed the positivity floor twice")
    return draw


def update_beta(
    state: ChainState, dataset: PanelDataset, constants: MixtureConstants, rng: RngStream
) -> np.ndarray:
    """Step 4: block-draw beta | alpha from its Gaussian conditional.

    Precision X' diag(w) X + diag(1/g^2) with per-observation weight
    w_ij = 1/(tau^2 sigma v_ij); linear term X' diag(w) (z - s'alpha - theta*v).
    """
    w = 1.0 / (constants.tau**2 * state.sigma * state.v)
    xw = dataset.x_all * w[:, None]
    precision = dataset.x_all.T @ xw
    precision[np.diag_indices_from(precision)] += 1.0 / state.g2
    target = state.z - _random_effect_rows(dataset, state.alpha) - constants.theta * state.v
    return sample_gaussian_from_precision(precision, xw.T @ target, rng)


def update_g2(state: ChainState, rng: RngStream) -> np.ndarray:
    """Step 5: lasso scales g2_h ~ GIG(1/2, beta_h^2, lambda^2), independent over h."""
    rho1 = state.beta * state.beta
    rho2 = np.full_like(rho1, state.lambda2)
    draws = _gig_half(rho1, rho2, rng.generator)
    return _refloor(draws, lambda bad: _gig_half(rho1[bad], rho2[bad], rng.generator), "g2")


def lambda2_conditional_params(state: ChainState, priors: PriorConfig) -> tuple[float, float]:
    """Gamma (shape, rate) of the lasso-rate conditional: (k + a1, sum(g2)/2 + a2)."""
    return len(state.beta) + priors.a1, float(np.sum(state.g2)) / 2.0 + priors.a2


def update_lambda2(state: ChainState, priors: PriorConfig, rng: RngStream) -> float:
    """Step 6: draw the lasso rate lambda^2 from its gamma conditional."""
    shape, rate = lambda2_conditional_params(state, priors)
    draw = sample_gamma(shape, rate, rng)
    if draw < _FLOOR:
        draw = sample_gamma(shape, rate, rng)
        if draw < _FLOOR:
            raise NumericError("lambda2 draw underflowed the positivity floor twice")
    return draw


def update_alpha(
    state: ChainState, dataset: PanelDataset, constants: MixtureConstants, rng: RngStream
) -> np.ndarray:
    """Step 7: block-draw all random effects alpha_i | beta.

    Per subject the precision is S_i' diag(w_i) S_i + I_l / phi^2 and the
    linear term S_i' diag(w_i) (z_i - x_i beta - theta v_i); subjects are
    independent given the rest, so the N draws happen in one batch.
    """
    w = 1.0 / (constants.tau**2 * state.sigma * state.v)
    resid = state.z - dataset.x_all @ state.beta - constants.theta * state.v
    starts = dataset.block_starts[:-1]
    s = dataset.s_all
    n_subj, l = dataset.n_subjects, dataset.l
    gen = rng.generator

    if l == 1:
        s1 = s[:, 0]
        prec = np.add.reduceat(s1 * s1 * w, starts) + 1.0 / state.phi2
        lin = np.add.reduceat(s1 * w * resid, starts)
        draws = lin / prec + gen.standard_normal(n_subj) / np.sqrt(prec)
        return draws[:, None]

    sw = s * w[:, None]
    prec = np.add.reduceat(sw[:, :, None] * s[:, None, :], starts, axis=0)
    prec[:, np.arange(l), np.arange(l)] += 1.0 / state.phi2
    lin = np.add.reduceat(sw * resid[:, None], starts, axis=0)
    try:
        chol = np.linalg.cholesky(prec)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"random-effect precision is not positive definite: {exc}") from exc
    mean = np.linalg.solve(prec, lin[:, :, None])[:, :, 0]
    eps = gen.standard_normal((n_subj, l))
    noise = np.linalg.solve(np.swapaxes(chol, 1, 2), eps[:, :, None])[:, :, 0]
    return mean + noise


def phi2_conditional_params(state: ChainState, priors: PriorConfig) -> tuple[float, float]:
    """Inverse-gamma (shape, scale) of the random-effect variance conditional.

    shape = N*l/2 + b1, scale = sum_i alpha_i' alpha_i / 2 + b2.
    """
    n_subj, l = state.alpha.shape
    return 0.5 * n_subj * l + priors.b1, float(np.sum(state.alpha * state.alpha)) / 2.0 + priors.b2


def update_phi2(state: ChainState, priors: PriorConfig, rng: RngStream) -> float:
    """Step 8: draw the random-effect variance phi^2 from its IG conditional."""
    shape, scale = phi2_conditional_params(state, priors)
    if shape <= 0.0:
        raise ParameterError(
            f"phi2 conditional shape {shape} is not positive; the improper prior "
            "needs N*l/2 > 1/2"
        )
    draw = sample_inverse_gamma(shape, scale, rng)
    if draw < _FLOOR:
        draw = sample_inverse_gamma(shape, scale, rng)
        if draw < _FLOOR:
            raise NumericError("phi2 draw underflowed the positivity floor twice")
    return draw


def initial_state(dataset: PanelDataset) -> ChainState:
    """Neutral starting point: zero effects, unit scales; burn-in absorbs the rest."""
    return ChainState(
        beta=np.zeros(dataset.k),
        alpha=np.zeros((dataset.n_subjects, dataset.l)),
        v=np.ones(dataset.n_total),
        sigma=1.0,
        phi2=1.0,
        g2=np.ones(dataset.k),
        lambda2=1.0,
        z=None,
    )


def run_chain(
    dataset: PanelDataset,
    pspec: QuantileSpec,
    priors: PriorConfig,
    config: GibbsConfig,
    jitter_index: int,
    rng: RngStream,
) -> ChainOutput:
    """Run one full chain on one jitter replicate; deterministic given ``rng``.

    Every sweep executes the eight updates in their fixed order; z is
    refreshed with new jitter noise every iteration.  Raises
    :class:`ChainError` with the sweep index if any step fails.
    """
    n_tot, n_subj, k, l = dataset.n_total, dataset.n_subjects, dataset.k, dataset.l
    if 1.5 * n_tot + priors.c1 <= 0 or 0.5 * n_subj * l + priors.b1 <= 0:
        raise ParameterError("posterior inverse-gamma shapes must be positive for this dataset")

    constants = mixture_constants(pspec.p)
    state = initial_state(dataset)
    n_rec = config.n_recorded

    out_iter = np.empty(n_rec, dtype=np.int64)
    out_beta = np.empty((n_rec, k))
    out_alpha = np.empty((n_rec, n_subj, l))
    out_sigma = np.empty(n_rec)
    out_phi2 = np.empty(n_rec)
    out_g2 = np.empty((n_rec, k))
    out_lambda2 = np.empty(n_rec)
    out_dev = np.empty(n_rec)
    out_z = np.empty((n_rec, n_tot)) if config.record_latents else None
    out_v = np.empty((n_rec, n_tot)) if config.record_latents else None

    rec = 0
    for it in range(1, config.iterations + 1):
        try:
            state.z = update_latent_z(dataset, pspec.p, pspec.zeta, rng)
            state.v = update_v(state, dataset, constants, rng)
            state.sigma = update_sigma(
                state, dataset, constants, priors, rng, config.paper_literal_sigma
            )
            state.beta = update_beta(state, dataset, constants, rng)
            state.g2 = update_g2(state, rng)
            state.lambda2 = update_lambda2(state, priors, rng)
            state.alpha = update_alpha(state, dataset, constants, rng)
            state.phi2 = update_phi2(state, priors, rng)
        except (NumericError, ParameterError) as exc:
            raise ChainError(str(exc), iteration=it, jitter_index=jitter_index) from exc
        if __debug__:
            state.assert_valid()

        if it > config.burn_in and (it - config.burn_in) % config.thin == 0:
            fitted = dataset.x_all @ state.beta + _random_effect_rows(dataset, state.alpha)
            out_iter[rec] = it
            out_beta[rec] = state.beta
            out_alpha[rec] = state.alpha
            out_sigma[rec] = state.sigma
            out_phi2[rec] = state.phi2
            out_g2[rec] = state.g2
            out_lambda2[rec] = state.lambda2
            out_dev[rec] = -2.0 * float(np.sum(ald_logpdf(state.z, fitted, state.sigma, pspec.p)))
            if config.record_latents:
                out_z[rec] = state.z
                out_v[rec] = state.v
            rec += 1

    plugin_z = update_latent_z(dataset, pspec.p, pspec.zeta, rng)
    return ChainOutput(
        p=pspec.p,
        jitter_index=jitter_index,
        iterations=config.iterations,
        burn_in=config.burn_in,
        thin=config.thin,
        iteration_index=out_iter,
        beta=out_beta,
        alpha=out_alpha,
        sigma=out_sigma,
        phi2=out_phi2,
        g2=out_g2,
        lambda2=out_lambda2,
        deviance=out_dev,
        plugin_z=plugin_z,
        z=out_z,
        v=out_v,
    )
