"""
Reading a report and checking the Negative-Binomial fit
=======================================================

Write a synthetic report to CSV, read it back, print descriptive
statistics, and compare the fit of the test-count model for a few sizes
``r``.
"""

import tempfile
from pathlib import Path

from positivity import (
    PriorSpec,
    bayes_estimate_theta,
    cumulative_stats,
    daily_ppt,
    moving_average,
    negbinom_fit_overlay,
    parse_report,
    posterior_update,
    summarize_series,
    write_report,
)
from positivity.synthetic import indiana_scale_series

path = Path(tempfile.mkdtemp()) / "report.csv"
write_report(indiana_scale_series(), path)

series = parse_report(path, drop_last=3)
print(f"{len(series.records)} records, {series.m} used")
print(summarize_series(series).table())

###############################################################################
# Daily PPT and its 7-day trailing average

ppt = daily_ppt(series)
ma = moving_average(ppt, 7)
for d, v, a in list(zip(series.dates, ppt, ma))[:10]:
    print(d, f"{v:.4f}", f"{a:.4f}")

###############################################################################
# Which Negative-Binomial size describes the daily test counts?

stats = cumulative_stats(series)
for r in (1, 2, 3, 5, 8):
    theta = bayes_estimate_theta(posterior_update(PriorSpec(r=r), stats))
    chi2, dof = negbinom_fit_overlay(series.tests, r, theta).chi_square()
    print(f"r={r}: theta={theta:.6f}  chi2={chi2:7.2f} on {dof} df")
