"""
Rolling one-day-ahead check
===========================

Refit on days ``1..n`` and see whether day ``n + 1`` falls in the 95%
interval.  We do it on data simulated from the model, where the daily
coverage should sit near 95%, and on a series with a drifting rate, where
it should not.
"""

import datetime as dt

import numpy as np

from positivity import DailyRecord, TestSeries, run_backtest
from positivity.synthetic import simulate_series

stationary = simulate_series(100, p=0.09, r=3, mean_tests=4800, seed=3)
report = run_backtest(stationary, level=0.95, draws=5000, seed=0)
print(f"stationary: daily coverage {report.coverage_daily:.3f}, "
      f"cumulative coverage {report.coverage_cumulative:.3f}")

###############################################################################
# A falling positivity rate, from 30% down to 5%.  The posterior pools all
# days, so it lags behind and the daily hits collapse.

rng = np.random.default_rng(4)
rates = np.linspace(0.30, 0.05, 100)
tests = stationary.tests
positives = rng.binomial(tests, rates)
start = dt.date(2020, 3, 16)
drifting = TestSeries(tuple(DailyRecord(start + dt.timedelta(days=i), int(k), int(y))
                            for i, (k, y) in enumerate(zip(tests, positives))), drop_last=0)
report = run_backtest(drifting, level=0.95, draws=5000, seed=0)
print(f"drifting  : daily coverage {report.coverage_daily:.3f}, "
      f"cumulative coverage {report.coverage_cumulative:.3f}")

for row in report.rows[::20]:
    print(f"day {row.n + 1:3d}  [{row.lower:.4f}, {row.upper:.4f}]  "
          f"daily {row.realized_daily_ppt:.4f}  cumulative {row.realized_cumulative_ppt:.4f}")
