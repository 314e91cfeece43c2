"""Synthetic daily reports drawn from the model itself.

Used by the tests and demos in place of the real state report, which is
not redistributed.
"""

from __future__ import annotations

import datetime as dt

import numpy as np

from positivity.distributions import NegBinomialParams, sample_negbinomial
from positivity.ingest import DailyRecord, TestSeries
from positivity.rng import make_rng

__all__ = ["simulate_series", "indiana_scale_series", "theta_for_mean", "INDIANA_M", "INDIANA_X", "INDIANA_N"]

INDIANA_M = 109
INDIANA_X = 46907
INDIANA_N = 522946
START = dt.date(2020, 3, 16)


def theta_for_mean(mean: float, r: int) -> float:
    """``theta`` giving ``NegBinom(r, theta)`` the requested mean."""
    return mean / (mean + r)


def simulate_series(days: int, p: float, r: int = 3, theta: float | None = None, mean_tests: float = 4800.0,
                    seed=None, start: dt.date = START, drop_last: int = 0) -> TestSeries:
    """Tests ``~ NegBinom(r, theta)`` and positives ``~ Binomial(tests, p)`` per day, all independent."""
    rng = make_rng(seed)
    theta = theta_for_mean(mean_tests, r) if theta is None else theta
    tests = sample_negbinomial(rng, NegBinomialParams(r, theta), size=days).astype(np.int64)
    positives = rng.binomial(tests, p)
    recs = [DailyRecord(start + dt.timedelta(days=i), int(k), int(y)) for i, (k, y) in enumerate(zip(tests, positives))]
    return TestSeries(tuple(recs), drop_last=drop_last)


def indiana_scale_series(seed: int = 2020, tail: int = 3) -> TestSeries:
    """Constant-rate series whose first 109 days total 46907 positives out of 522946 tests.

    ``tail`` further days follow and are marked as dropped, so the
    effective series reproduces the Indiana cumulative counts (to early July
    2020) exactly; the day-by-day split is simulated.
    """
    rng = make_rng(seed)
    r = 3
    p = INDIANA_X / INDIANA_N
    theta = theta_for_mean(INDIANA_N / INDIANA_M, r)
    while True:
        raw = sample_negbinomial(rng, NegBinomialParams(r, theta), size=INDIANA_M).astype(float)
        scaled = raw * INDIANA_N / raw.sum()
        tests = np.floor(scaled).astype(np.int64)
        short = INDIANA_N - int(tests.sum())
        # largest-remainder rounding
        tests[np.argsort(scaled - tests, kind="stable")[::-1][:short]] += 1
        if tests.min() >= 50:
            break

    pos = rng.binomial(tests, p).astype(np.int64)
    gap = INDIANA_X - int(pos.sum())
    step = 1 if gap > 0 else -1
    while gap:
        i = int(rng.integers(INDIANA_M))
        if 0 <= pos[i] + step <= tests[i]:
            pos[i] += step
            gap -= step

    tail_tests = sample_negbinomial(rng, NegBinomialParams(r, theta), size=tail).astype(np.int64)
    tail_pos = rng.binomial(tail_tests, p)
    all_tests = np.concatenate([tests, tail_tests])
    all_pos = np.concatenate([pos, tail_pos])
    recs = [DailyRecord(START + dt.timedelta(days=i), int(k), int(y)) for i, (k, y) in enumerate(zip(all_tests, all_pos))]
    return TestSeries(tuple(recs), drop_last=tail)
