"""
Next-day positivity: Monte-Carlo predictive interval
====================================================

Draw next-day tests from the Beta-Negative-Binomial predictive, positives
from the Beta-Binomial given those tests, and look at their ratio.
"""

import numpy as np

from positivity import (
    PriorSpec,
    SufficientStats,
    empirical_cdf,
    posterior_update,
    prediction_interval,
    simulate_predictive,
    summarize,
)
from positivity.predictive import pstar_histogram

post = posterior_update(PriorSpec(1, 1, 1, 1, r=3), SufficientStats(109, 46907, 522946))
draws = simulate_predictive(post, draws=5000, seed=1)

summary = summarize(draws, level=0.95)
print(f"{'':8s}{'mean':>12s}{'sd':>12s}{'2.5%':>12s}{'97.5%':>12s}")
for name, mean, sd, lo, hi in summary.rows():
    print(f"{name:8s}{mean:12.4f}{sd:12.4f}{lo:12.4f}{hi:12.4f}")

###############################################################################
# The interval is read off the empirical CDF as order statistics.

cdf = empirical_cdf(draws)
lo, hi = prediction_interval(cdf, 0.95)
print(f"95% interval for next-day PPT: [{lo:.5f}, {hi:.5f}]")
print(f"P(p* <= 0.10) ~ {cdf(0.10):.3f}")

###############################################################################
# Seed-to-seed variation of the bounds at B = 5000.

bounds = np.array([prediction_interval(empirical_cdf(simulate_predictive(post, 5000, seed=s)), 0.95)
                   for s in range(20)])
print("median bounds over 20 seeds:", np.median(bounds, axis=0).round(5))
print("spread (sd) of bounds      :", bounds.std(axis=0).round(5))

###############################################################################
# Histogram with a normal overlay, if matplotlib is around.

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    edges, counts, density, normal = pstar_histogram(draws, bins=40)
    centres = 0.5 * (edges[:-1] + edges[1:])
    plt.bar(centres, density, width=np.diff(edges), alpha=0.5)
    plt.plot(centres, normal, "r-")
    for x in (lo, hi):
        plt.axvline(x, color="b")
    plt.xlabel("next-day PPT")
    plt.savefig("predictive_pstar.png", dpi=100)
