"""Fit conditional quantiles to simulated panel counts, end to end.

Generates a random-intercept panel of Poisson counts, fits the median model
with jitter averaging, and prints the pooled summary next to the truth.
Runs in well under a minute at this reduced chain length.
"""
import numpy as np

from alqpanel import (
    PriorConfig,
    QuantileSpec,
    average_jitter_fit,
    gen_study1,
    predict_count_quantile,
)

# 20 subjects, 5 repeated counts each; log-mean = x'beta + subject intercept
data, truth = gen_study1(n_subjects=20, n_per=5, seed=11)
print(f"simulated {data.n_total} observations from {data.n_subjects} subjects")
print(f"count range {data.counts.min()}..{data.counts.max()}, "
      f"true beta = {truth.beta_true.tolist()}")

spec = QuantileSpec(
    p=0.5,
    m_jitter=5,         # production-scale runs use 20
    iterations=2000,    # and 12000 total sweeps
    burn_in=500,
    master_seed=2024,
)
summary, chains = average_jitter_fit(data, spec, PriorConfig())

print(f"\nmedian-model fit, averaged over {spec.m_jitter} jitter replicates "
      f"({summary.retained} retained draws each):")
print(f"{'':10s}{'estimate':>10s}{'pooled sd':>11s}{'95% interval':>22s}{'truth':>8s}")
for j, name in enumerate(["beta1", "beta2", "beta3"]):
    c = summary.coefficients[name]
    print(f"{name:10s}{c.avg_post_mean:10.4f}{c.pooled_sd:11.4f}"
          f"   ({c.avg_ci_low:7.4f}, {c.avg_ci_high:7.4f}){truth.beta_true[j]:8.1f}")
for name in ("sigma", "phi2", "lambda2"):
    c = summary.coefficients[name]
    print(f"{name:10s}{c.avg_post_mean:10.4f}{c.pooled_sd:11.4f}")

# integer median predictions for a fresh subject (random effect = 0)
beta_hat = np.array([summary.coefficients[f"beta{j+1}"].avg_post_mean for j in range(3)])
print("\npredicted median counts for a new subject:")
for x in ([0.2, 0.2, 0.2], [0.5, 0.5, 0.5], [0.9, 0.9, 0.9]):
    pred = predict_count_quantile(beta_hat, np.zeros(1), np.array(x), np.array([1.0]), 0.5)
    print(f"  x = {x} -> {pred}")
