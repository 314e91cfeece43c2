"""Reading daily testing reports and deriving the positivity series.

Input is a UTF-8 CSV with a header row.  Only ``DATE`` (ISO-8601),
``COVID_TEST`` and ``COVID_COUNT`` are read; the other report columns
(``DAILY_DELTA_*``, ``DAILY_BASE_*``, deaths, cumulative sums) may be
present and are ignored.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
import os
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import betainc

from positivity.model import SufficientStats

__all__ = [
    "IngestError",
    "MissingColumnError",
    "DateParseError",
    "DuplicateDateError",
    "CountError",
    "DailyRecord",
    "TestSeries",
    "ColumnSummary",
    "SeriesSummary",
    "NegBinomOverlay",
    "parse_report",
    "write_report",
    "daily_ppt",
    "moving_average",
    "cumulative_stats",
    "summarize_series",
    "negbinom_fit_overlay",
    "DEFAULT_DROP_LAST",
]

DATE_COL = "DATE"
TESTS_COL = "COVID_TEST"
POSITIVES_COL = "COVID_COUNT"
DEFAULT_DROP_LAST = 3


class IngestError(ValueError):
    """Base class for problems with an input report."""


class MissingColumnError(IngestError):
    pass


class DateParseError(IngestError):
    pass


class DuplicateDateError(IngestError):
    pass


class CountError(IngestError):
    """Negative, non-integer, or inconsistent (positives > tests) counts."""


@dataclass(frozen=True)
class DailyRecord:
    date: dt.date
    tests: int
    positives: int

    def __post_init__(self):
        if self.tests < 0 or self.positives < 0:
            raise CountError(f"{self.date}: negative count")
        if self.positives > self.tests:
            raise CountError(f"{self.date}: positives {self.positives} exceed tests {self.tests}")


@dataclass(frozen=True)
class TestSeries:
    """Date-ordered daily records.

    The last ``drop_last`` records are still being revised at report time
    and are left out of every analysis; :attr:`records` holds them, while
    :attr:`effective` is what the model sees.
    """

    __test__ = False  # not a pytest class

    records: tuple[DailyRecord, ...]
    drop_last: int = DEFAULT_DROP_LAST

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if self.drop_last < 0:
            raise ValueError("drop_last must be non-negative")
        dates = [r.date for r in self.records]
        for prev, cur in zip(dates, dates[1:]):
            if cur <= prev:
                raise DuplicateDateError(f"dates not strictly increasing at {cur}")

    @property
    def effective(self) -> tuple[DailyRecord, ...]:
        n = max(len(self.records) - self.drop_last, 0)
        return self.records[:n]

    @property
    def m(self) -> int:
        return len(self.effective)

    def __len__(self):
        return len(self.effective)

    @property
    def dates(self) -> list[dt.date]:
        return [r.date for r in self.effective]

    @property
    def tests(self) -> np.ndarray:
        return np.array([r.tests for r in self.effective], dtype=np.int64)

    @property
    def positives(self) -> np.ndarray:
        return np.array([r.positives for r in self.effective], dtype=np.int64)

    def since(self, start: dt.date | None) -> "TestSeries":
        """Drop records dated before ``start``."""
        if start is None:
            return self
        return replace(self, records=tuple(r for r in self.records if r.date >= start))

    def with_drop_last(self, drop_last: int) -> "TestSeries":
        return replace(self, drop_last=drop_last)


def _parse_int(text, line, col):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise CountError(f"row {line}: {col}={text!r} is not a number") from None
    if not math.isfinite(value) or value != int(value):
        raise CountError(f"row {line}: {col}={text!r} is not an integer")
    if value < 0:
        raise CountError(f"row {line}: {col}={text!r} is negative")
    return int(value)


def _read_rows(reader: csv.DictReader) -> list[DailyRecord]:
    header = reader.fieldnames or []
    stripped = {h.strip(): h for h in header if h is not None}
    missing = [c for c in (DATE_COL, TESTS_COL, POSITIVES_COL) if c not in stripped]
    if missing:
        raise MissingColumnError(f"missing required column(s): {', '.join(missing)}")
    dcol, tcol, pcol = (stripped[c] for c in (DATE_COL, TESTS_COL, POSITIVES_COL))

    records, seen = [], {}
    for i, row in enumerate(reader):
        line = i + 2  # header is line 1
        raw_date = (row.get(dcol) or "").strip()
        try:
            date = dt.date.fromisoformat(raw_date[:10])
        except ValueError:
            raise DateParseError(f"row {line}: cannot parse date {raw_date!r}") from None
        if date in seen:
            raise DuplicateDateError(f"row {line}: date {date} already given on row {seen[date]}")
        seen[date] = line
        tests = _parse_int(row.get(tcol), line, TESTS_COL)
        positives = _parse_int(row.get(pcol), line, POSITIVES_COL)
        if positives > tests:
            raise CountError(f"row {line}: {POSITIVES_COL}={positives} exceeds {TESTS_COL}={tests}")
        records.append(DailyRecord(date, tests, positives))
    records.sort(key=lambda r: r.date)
    return records


def parse_report(source, drop_last: int = DEFAULT_DROP_LAST, start_date: dt.date | None = None) -> TestSeries:
    """Read a daily report CSV.

    Parameters
    ----------
    source : path, text/binary file object, or bytes
    drop_last : int
        Number of trailing (still-updating) days to exclude.
    start_date : date, optional
        Ignore records dated earlier.

    Raises
    ------
    MissingColumnError, DateParseError, DuplicateDateError, CountError
        Messages carry the 1-based line number of the offending row.
    """
    if isinstance(source, (bytes, bytearray)):
        source = io.StringIO(bytes(source).decode("utf-8-sig"))
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8-sig") as fh:
            records = _read_rows(csv.DictReader(fh))
    else:
        if isinstance(source, io.BufferedIOBase) or "b" in getattr(source, "mode", ""):
            source = io.TextIOWrapper(source, encoding="utf-8-sig", newline="")
        records = _read_rows(csv.DictReader(source))
    return TestSeries(tuple(records), drop_last=drop_last).since(start_date)


def write_report(series: TestSeries, dest) -> None:
    """Write all records (including the dropped tail) in the input CSV layout."""
    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([DATE_COL, TESTS_COL, POSITIVES_COL])
        for r in series.records:
            w.writerow([r.date.isoformat(), r.tests, r.positives])

    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            _write(fh)
    else:
        _write(dest)


def daily_ppt(series: TestSeries) -> np.ndarray:
    """Positives over tests per day; days without tests are ``nan``."""
    tests = series.tests.astype(float)
    pos = series.positives.astype(float)
    out = np.full(tests.shape, np.nan)
    ok = tests > 0
    out[ok] = pos[ok] / tests[ok]
    return out


def moving_average(values, window: int = 7) -> np.ndarray:
    """Trailing mean over ``window`` days.

    The first ``window - 1`` entries average over the history available so
    far.  ``nan`` entries (undefined days) are left out of both numerator
    and denominator; a window with no defined value yields ``nan``.
    """
    if isinstance(window, bool) or int(window) != window or window < 1:
        raise ValueError(f"window must be a positive integer, got {window!r}")
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return x.copy()
    padded = np.concatenate([np.full(int(window) - 1, np.nan), x])
    win = np.lib.stride_tricks.sliding_window_view(padded, int(window))
    count = np.sum(~np.isnan(win), axis=1)
    # averaging deviations from a per-window reference keeps constant windows exact
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        ref = np.nanmax(win, axis=1)
    dev = np.nansum(win - ref[:, None], axis=1)
    return np.where(count > 0, ref + dev / np.maximum(count, 1), np.nan)


def cumulative_stats(series: TestSeries, upto: int | None = None) -> SufficientStats:
    """Totals over the first ``upto`` days of the effective series (all of them by default)."""
    m = series.m if upto is None else upto
    if isinstance(m, bool) or int(m) != m or not 1 <= m <= series.m:
        raise IndexError(f"upto={upto!r} outside 1..{series.m}")
    recs = series.effective[: int(m)]
    return SufficientStats(int(m), sum(r.positives for r in recs), sum(r.tests for r in recs))


@dataclass(frozen=True)
class ColumnSummary:
    min: float
    q1: float
    median: float
    mean: float
    q3: float
    max: float
    sd: float

    @classmethod
    def of(cls, values) -> "ColumnSummary":
        x = np.asarray(values, dtype=float)
        x = x[~np.isnan(x)]
        if x.size == 0:
            raise ValueError("cannot summarize an empty column")
        # method="linear" interpolates between order statistics at (n-1)*q.
        q1, med, q3 = np.percentile(x, [25, 50, 75], method="linear")
        sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
        return cls(float(x.min()), float(q1), float(med), float(x.mean()), float(q3), float(x.max()), sd)

    def as_dict(self):
        return {k: getattr(self, k) for k in ("min", "q1", "median", "mean", "q3", "max", "sd")}


@dataclass(frozen=True)
class SeriesSummary:
    tests: ColumnSummary
    positives: ColumnSummary
    ppt: ColumnSummary
    n: int = 0

    STAT_LABELS = (("min", "Min."), ("q1", "1st Qu."), ("median", "Median"),
                   ("mean", "Mean"), ("q3", "3rd Qu."), ("max", "Max."), ("sd", "SD"))

    def as_dict(self):
        return {"n": self.n, "COVID_TEST": self.tests.as_dict(),
                "COVID_COUNT": self.positives.as_dict(), "PPT": self.ppt.as_dict()}

    def table(self) -> str:
        """Fixed-width text table, three decimals."""
        lines = [f"{'':10s}{'COVID_TEST':>14s}{'COVID_COUNT':>14s}{'PPT':>10s}"]
        for key, label in self.STAT_LABELS:
            lines.append(
                f"{label:10s}{getattr(self.tests, key):14.3f}"
                f"{getattr(self.positives, key):14.3f}{getattr(self.ppt, key):10.3f}"
            )
        return "\n".join(lines)


def summarize_series(series: TestSeries) -> SeriesSummary:
    """Min, quartiles, mean, max and SD (divisor n-1) of tests, positives and daily PPT.

    Note the PPT mean is an unweighted average of daily ratios and is not
    the cumulative rate ``X/N``.
    """
    if series.m == 0:
        raise ValueError("cannot summarize an empty series")
    return SeriesSummary(
        tests=ColumnSummary.of(series.tests),
        positives=ColumnSummary.of(series.positives),
        ppt=ColumnSummary.of(daily_ppt(series)),
        n=series.m,
    )


def _negbinom_cdf(k, r, theta):
    # P(K <= k) = I_{1-theta}(r, k+1) under the theta-counts-events convention.
    k = np.asarray(k, dtype=float)
    out = np.where(k < 0, 0.0, betainc(r, np.maximum(k, 0) + 1.0, 1.0 - theta))
    return out


@dataclass(frozen=True)
class NegBinomOverlay:
    """Histogram of daily test counts with fitted Negative-Binomial bin masses.

    Bin ``i`` covers the integers in ``[edges[i], edges[i+1])``, except the
    last bin, which also includes its right edge.
    """

    edges: np.ndarray
    counts: np.ndarray
    fitted_prob: np.ndarray
    r: int
    theta: float

    @property
    def expected(self) -> np.ndarray:
        return self.fitted_prob * self.counts.sum()

    def chi_square(self, min_expected: float = 5.0) -> tuple[float, int]:
        """Pearson statistic and degrees of freedom after pooling sparse bins.

        Mass outside the histogram range is pooled into the end bins first.
        Bins are then merged left to right until each expected count reaches
        ``min_expected``.
        """
        n = self.counts.sum()
        probs = self.fitted_prob.astype(float).copy()
        probs[0] += _negbinom_cdf(self.edges[0] - 1, self.r, self.theta)
        probs[-1] += 1.0 - _negbinom_cdf(self.edges[-1], self.r, self.theta)
        obs_groups, exp_groups = [], []
        o = e = 0.0
        for ci, pi in zip(self.counts, probs):
            o += ci
            e += pi * n
            if e >= min_expected:
                obs_groups.append(o)
                exp_groups.append(e)
                o = e = 0.0
        if e > 0 or o > 0:
            if exp_groups:
                obs_groups[-1] += o
                exp_groups[-1] += e
            else:
                obs_groups.append(o)
                exp_groups.append(e)
        obs = np.array(obs_groups)
        exp = np.array(exp_groups)
        stat = float(np.sum((obs - exp) ** 2 / exp))
        return stat, max(len(obs) - 1, 0)

    def rows(self):
        for i in range(self.counts.size):
            yield (float(self.edges[i]), float(self.edges[i + 1]), int(self.counts[i]),
                   float(self.fitted_prob[i]), float(self.expected[i]))


def negbinom_fit_overlay(tests, r: int, theta_hat: float, bins: int | str = "auto") -> NegBinomOverlay:
    """Bin the daily test counts and attach ``NegBinom(r, theta_hat)`` mass per bin.

    ``theta_hat`` follows the convention of :mod:`positivity.distributions`
    (mean ``r * theta / (1 - theta)``).
    """
    x = np.asarray(tests, dtype=np.int64)
    if x.size == 0:
        raise ValueError("no test counts to bin")
    if not 0 < theta_hat < 1 or r < 1:
        raise ValueError("need r >= 1 and theta_hat in (0, 1)")
    lo, hi = int(x.min()), int(x.max())
    if lo == hi:
        edges = np.array([lo, hi + 1], dtype=float)
    else:
        edges = np.unique(np.floor(np.histogram_bin_edges(x, bins=bins)))
        edges[-1] = hi
        if edges.size < 2:
            edges = np.array([lo, hi], dtype=float)
    counts, _ = np.histogram(x, bins=edges)
    # integer ranges [ceil(e_i), ceil(e_{i+1}) - 1], last bin closed
    upper = np.ceil(edges[1:]) - 1
    upper[-1] = np.floor(edges[-1]) if lo != hi else lo
    lower = np.ceil(edges[:-1])
    fitted = _negbinom_cdf(upper, r, theta_hat) - _negbinom_cdf(lower - 1, r, theta_hat)
    return NegBinomOverlay(edges=edges, counts=counts, fitted_prob=fitted, r=int(r), theta=float(theta_hat))
