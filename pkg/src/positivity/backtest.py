"""Rolling one-day-ahead evaluation of the positivity prediction interval.

For each day ``n = 2, ..., m - 1`` the posterior is fitted on days
``1..n``, a predictive interval for ``p*`` is simulated, and day ``n + 1``
is checked against it twice: once with that day's own positivity
(``positives / tests``, the quantity ``p*`` actually predicts) and once
with the cumulative positivity through day ``n + 1``.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from positivity.ingest import TestSeries, cumulative_stats
from positivity.model import PriorSpec, posterior_update
from positivity.predictive import DEFAULT_DRAWS, empirical_cdf, prediction_interval, simulate_predictive
from positivity.rng import child_rng

__all__ = ["SeriesTooShortError", "BacktestRow", "BacktestReport", "run_backtest", "day_interval"]

MIN_DAYS = 3


class SeriesTooShortError(ValueError):
    pass


@dataclass(frozen=True)
class BacktestRow:
    n: int
    date: dt.date
    lower: float
    upper: float
    realized_cumulative_ppt: float
    realized_daily_ppt: float
    hit_cumulative: bool
    hit_daily: bool

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class BacktestReport:
    """Per-day rows plus coverage fractions.

    Days whose realized daily PPT is undefined (no tests) count as misses
    for neither series; they are left out of ``coverage_daily``.
    """

    rows: tuple[BacktestRow, ...]
    coverage_cumulative: float
    coverage_daily: float
    level: float
    draws: int
    seed: int

    @property
    def widths(self) -> np.ndarray:
        return np.array([r.width for r in self.rows])

    def as_dict(self) -> dict:
        return {
            "rows": len(self.rows),
            "coverage_cumulative": self.coverage_cumulative,
            "coverage_daily": self.coverage_daily,
            "level": self.level,
            "draws": self.draws,
            "seed": self.seed,
        }


def day_interval(series: TestSeries, prior: PriorSpec, n: int, level: float, draws: int, seed: int):
    """Interval for day ``n + 1`` from the data through day ``n``.

    Uses the sub-stream ``(seed, n)``, so any single row of a backtest can
    be reproduced on its own.
    """
    post = posterior_update(prior, cumulative_stats(series, n))
    sample = simulate_predictive(post, draws, seed=child_rng(seed, n))
    return prediction_interval(empirical_cdf(sample), level)


def run_backtest(
    series: TestSeries,
    prior: PriorSpec | None = None,
    level: float = 0.95,
    draws: int = DEFAULT_DRAWS,
    seed: int = 0,
) -> BacktestReport:
    """Walk forward through ``series`` one day at a time.

    Raises
    ------
    SeriesTooShortError
        Fewer than three effective days.
    """
    prior = prior or PriorSpec()
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level!r}")
    m = series.m
    if m < MIN_DAYS:
        raise SeriesTooShortError(f"series too short: {m} effective day(s), need at least {MIN_DAYS}")

    recs = series.effective
    tests = series.tests
    pos = series.positives
    cum_tests = np.cumsum(tests)
    cum_pos = np.cumsum(pos)

    rows = []
    for n in range(2, m):
        lo, hi = day_interval(series, prior, n, level, draws, seed)
        # day n + 1 is index n
        cum = cum_pos[n] / cum_tests[n] if cum_tests[n] else math.nan
        daily = pos[n] / tests[n] if tests[n] else math.nan
        rows.append(BacktestRow(
            n=n,
            date=recs[n].date,
            lower=lo,
            upper=hi,
            realized_cumulative_ppt=float(cum),
            realized_daily_ppt=float(daily),
            hit_cumulative=bool(lo <= cum <= hi),
            hit_daily=bool(lo <= daily <= hi),
        ))

    def _coverage(values, hits):
        keep = [h for v, h in zip(values, hits) if not math.isnan(v)]
        return sum(keep) / len(keep) if keep else math.nan

    return BacktestReport(
        rows=tuple(rows),
        coverage_cumulative=_coverage([r.realized_cumulative_ppt for r in rows], [r.hit_cumulative for r in rows]),
        coverage_daily=_coverage([r.realized_daily_ppt for r in rows], [r.hit_daily for r in rows]),
        level=level,
        draws=draws,
        seed=seed,
    )
