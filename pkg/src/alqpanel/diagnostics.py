"""Model-comparison metrics (plug-in NLL, DIC) and plot-ready exports.

Deviance here is always the AL working deviance of the latent scale,
-2 * sum_ij log f_AL(z_ij | fitted_ij, sigma, p).  DIC needs a fixed dataset,
but the chain refreshes its latent every sweep; each chain therefore draws
one extra jittered latent after its final sweep (``plugin_z``) and DIC
evaluates every recorded draw and the posterior means against that same
fixed latent.  Pairing each draw with its own sweep's latent instead lets
jitter noise swamp the effective-parameter term (and routinely drives it
negative), so those per-sweep deviances are kept only as a chain trace.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import ald_logpdf
from .exceptions import ParameterError
from .gibbs import ChainOutput, _random_effect_rows
from .model import PanelDataset, QuantileSpec

__all__ = [
    "ModelComparison",
    "compute_nll",
    "compute_dic",
    "export_trace",
    "kde_density",
]


@dataclass(frozen=True)
class ModelComparison:
    """NLL/DIC record for one quantile-level model.

    The identities dic = deviance_at_mean + 2*p_d and dic = mean_deviance + p_d
    hold by construction; p_d may come out negative (a known DIC pathology)
    and is reported as-is.
    """

    quantile: float
    nll: float
    dic: float
    p_d: float

    @classmethod
    def from_deviances(
        cls, quantile: float, mean_deviance: float, deviance_at_mean: float
    ) -> "ModelComparison":
        p_d = mean_deviance - deviance_at_mean
        return cls(
            quantile=quantile,
            nll=0.5 * deviance_at_mean,
            dic=deviance_at_mean + 2.0 * p_d,
            p_d=p_d,
        )


def _plugin_deviance(chain: ChainOutput, dataset: PanelDataset, p: float) -> float:
    """Deviance at the chain's posterior means, on the chain's plug-in latent."""
    beta_bar = chain.beta.mean(axis=0)
    alpha_bar = chain.alpha.mean(axis=0)
    sigma_bar = float(chain.sigma.mean())
    fitted = dataset.x_all @ beta_bar + _random_effect_rows(dataset, alpha_bar)
    return -2.0 * float(np.sum(ald_logpdf(chain.plugin_z, fitted, sigma_bar, p)))


def compute_nll(
    chain_outputs: Sequence[ChainOutput], dataset: PanelDataset, pspec: QuantileSpec
) -> float:
    """Negative AL log-likelihood at the posterior means, averaged over replicates.

    Each replicate is evaluated on its own single fresh jitter of the latent
    scale (the chain's ``plugin_z``).
    """
    if not chain_outputs:
        raise ParameterError("need at least one chain output")
    return float(
        np.mean([0.5 * _plugin_deviance(c, dataset, pspec.p) for c in chain_outputs])
    )


def _fixed_latent_deviances(
    chain: ChainOutput, dataset: PanelDataset, p: float
) -> np.ndarray:
    """Deviance of every recorded draw against the chain's fixed plug-in latent."""
    fitted = chain.beta @ dataset.x_all.T + np.einsum(
        "nl,rnl->rn", dataset.s_all, chain.alpha[:, dataset.subject_index, :]
    )
    u = (chain.plugin_z[None, :] - fitted) / chain.sigma[:, None]
    rho = u * (p - (u < 0.0))
    n = dataset.n_total
    return -2.0 * (n * np.log(p * (1.0 - p) / chain.sigma) - rho.sum(axis=1))


def compute_dic(
    chain_output: ChainOutput, dataset: PanelDataset, pspec: QuantileSpec
) -> ModelComparison:
    """DIC of one chain: D(post mean) + 2 * (mean deviance - D(post mean)).

    Both deviances are evaluated against the chain's single plug-in latent,
    which plays the role of the fixed dataset.
    """
    d_bar = float(_fixed_latent_deviances(chain_output, dataset, pspec.p).mean())
    d_hat = _plugin_deviance(chain_output, dataset, pspec.p)
    return ModelComparison.from_deviances(pspec.p, d_bar, d_hat)


_INDEXED = re.compile(r"^(beta|g2)\[(\d+)\]$")
_ALPHA = re.compile(r"^alpha\[(\d+),(\d+)\]$")


def export_trace(
    chain_output: ChainOutput, selector: str
) -> tuple[np.ndarray, np.ndarray]:
    """Trace of one scalar coefficient: (iteration numbers, values), in order.

    Selectors: ``beta[i]`` and ``g2[i]`` with 1-based i, ``alpha[i,j]`` with
    1-based subject and component, plus ``sigma``, ``phi2``, ``lambda2`` and
    ``deviance``.
    """
    if chain_output.n_recorded == 0:
        raise ParameterError("chain has no recorded draws")
    scalars = {
        "sigma": chain_output.sigma,
        "phi2": chain_output.phi2,
        "lambda2": chain_output.lambda2,
        "deviance": chain_output.deviance,
    }
    if selector in scalars:
        return chain_output.iteration_index.copy(), scalars[selector].copy()
    m = _INDEXED.match(selector)
    if m:
        arr = chain_output.beta if m.group(1) == "beta" else chain_output.g2
        idx = int(m.group(2))
        if not 1 <= idx <= arr.shape[1]:
            raise KeyError(
                f"{m.group(1)} index {idx} out of range 1..{arr.shape[1]} in selector {selector!r}"
            )
        return chain_output.iteration_index.copy(), arr[:, idx - 1].copy()
    m = _ALPHA.match(selector)
    if m:
        i, j = int(m.group(1)), int(m.group(2))
        _, n_subj, l = chain_output.alpha.shape
        if not (1 <= i <= n_subj and 1 <= j <= l):
            raise KeyError(f"alpha index ({i},{j}) out of range in selector {selector!r}")
        return chain_output.iteration_index.copy(), chain_output.alpha[:, i - 1, j - 1].copy()
    raise KeyError(f"unknown coefficient selector {selector!r}")


def kde_density(values, grid_size: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian kernel density on a regular grid, Silverman's rule of thumb.

    Bandwidth 0.9 * min(sd, IQR/1.34) * n^(-1/5); the grid spans the data
    range extended by three bandwidths on each side.
    """
    values = np.asarray(values, dtype=float).ravel()
    if grid_size < 2:
        raise ParameterError(f"grid_size must be >= 2, got {grid_size}")
    if len(values) < 2 or np.all(values == values[0]):
        raise ParameterError("kernel density needs at least two distinct values")
    sd = float(np.std(values, ddof=1))
    q75, q25 = np.percentile(values, [75.0, 25.0])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0.0 else sd
    h = 0.9 * spread * len(values) ** (-0.2)
    grid = np.linspace(values.min() - 3.0 * h, values.max() + 3.0 * h, grid_size)
    density = np.empty(grid_size)
    norm = 1.0 / (len(values) * h * np.sqrt(2.0 * np.pi))
    # chunk the grid so the (grid x data) matrix stays small
    step = max(1, int(2**22 / max(len(values), 1)))
    for lo in range(0, grid_size, step):
        block = grid[lo : lo + step, None]
        u = (block - values[None, :]) / h
        density[lo : lo + step] = norm * np.exp(-0.5 * u * u).sum(axis=1)
    return grid, density
