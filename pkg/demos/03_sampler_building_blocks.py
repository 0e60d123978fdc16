"""Tour of the random-variate machinery underneath the Gibbs sampler.

Shows the reproducible stream design, the index-1/2 generalized inverse
Gaussian sampler against its closed-form mean, precision-parameterized
Gaussian block draws, and the normal-exponential mixture identity that makes
the asymmetric Laplace likelihood tractable.
"""
import numpy as np

from alqpanel import (
    GigHalfParams,
    RngStream,
    mixture_constants,
    sample_gaussian_from_precision,
    sample_gig_half,
)

# --- reproducible streams -------------------------------------------------
a = sample_gig_half(GigHalfParams(1.0, 1.0), RngStream(seed=5, stream_id=0), size=3)
b = sample_gig_half(GigHalfParams(1.0, 1.0), RngStream(seed=5, stream_id=0), size=3)
c = sample_gig_half(GigHalfParams(1.0, 1.0), RngStream(seed=5, stream_id=1), size=3)
print("same (seed, stream):", a, "==", b)
print("other stream:       ", c)

# --- GIG(1/2) draws vs the closed-form mean -------------------------------
print("\nGIG(1/2, rho1, rho2) sample means vs sqrt(rho1/rho2) * (1 + 1/sqrt(rho1*rho2)):")
rng = RngStream(seed=5, stream_id=2)
for rho1, rho2 in ((1.0, 1.0), (4.0, 1.0), (1.0, 4.0)):
    draws = sample_gig_half(GigHalfParams(rho1, rho2), rng, size=200_000)
    exact = np.sqrt(rho1 / rho2) * (1.0 + 1.0 / np.sqrt(rho1 * rho2))
    print(f"  rho1={rho1}, rho2={rho2}: sample {draws.mean():.4f}, exact {exact:.4f}")

# --- Gaussian block draws from a precision matrix -------------------------
precision = np.array([[2.0, 1.0], [1.0, 2.0]])
linear = np.array([3.0, 3.0])
draws = sample_gaussian_from_precision(precision, linear, RngStream(5, 3), size=200_000)
print("\nprecision-parameterized Gaussian:")
print("  sample mean", draws.mean(axis=0).round(3), "(expect [1, 1])")
print("  sample cov\n", np.cov(draws.T).round(3), "(expect [[2/3, -1/3], [-1/3, 2/3]])")

# --- the mixture identity behind the working likelihood -------------------
print("\nAL errors as a normal-exponential mixture: P(eps <= 0) should equal p")
gen = RngStream(5, 4).generator
for p in (0.1, 0.25, 0.5, 0.75, 0.9):
    const = mixture_constants(p)
    v = gen.exponential(1.0, 500_000)
    u = gen.standard_normal(500_000)
    eps = const.theta * v + const.tau * np.sqrt(v) * u
    print(f"  p={p:4.2f}: empirical {np.mean(eps <= 0.0):.4f}")
