"""Compare quantile-level models with NLL and DIC.

Fits the three quartile models to one simulated panel and prints the
comparison table; the median model should win on this symmetric design.
"""
from alqpanel import PriorConfig, QuantileSpec, average_jitter_fit, gen_study1

data, _ = gen_study1(seed=3)
print(f"dataset: {data.n_total} counts, mean {data.counts.mean():.1f}")

rows = []
for p in (0.25, 0.50, 0.75):
    spec = QuantileSpec(p=p, m_jitter=4, iterations=2500, burn_in=500, master_seed=7)
    summary, _ = average_jitter_fit(data, spec, PriorConfig())
    rows.append((p, summary.avg_nll, summary.avg_dic, summary.avg_p_d))
    print(f"fitted p={p}")

print(f"\n{'quantile':>9s}{'NLL':>10s}{'DIC':>10s}{'p_D':>8s}")
for p, nll, dic, p_d in rows:
    print(f"{p:9.2f}{nll:10.1f}{dic:10.1f}{p_d:8.1f}")

best = min(rows, key=lambda r: r[2])
print(f"\nlowest DIC at p = {best[0]:.2f}")
