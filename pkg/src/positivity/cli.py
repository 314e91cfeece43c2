"""Command-line interface.

Subcommands ``summarize``, ``predict``, ``backtest`` and ``plotdata`` read
a daily report CSV and write plain CSV/JSON files into ``--out``.  Nothing
is rendered; the files are meant for any plotting tool.

Exit status: 0 on success, 1 on an internal error, 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from positivity.backtest import SeriesTooShortError, run_backtest
from positivity.ingest import (
    DEFAULT_DROP_LAST,
    IngestError,
    TestSeries,
    cumulative_stats,
    daily_ppt,
    moving_average,
    negbinom_fit_overlay,
    parse_report,
    summarize_series,
)
from positivity.model import (
    PriorSpec,
    SufficientStats,
    ValidationError,
    bayes_estimate_p,
    bayes_estimate_theta,
    posterior_update,
    predictive_moments_k,
)
from positivity.predictive import DEFAULT_DRAWS, pstar_histogram, simulate_predictive, summarize

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2
THRESHOLDS = (0.10, 0.05)
MA_WINDOW = 7
R_SWEEP = range(1, 11)


class InputError(Exception):
    """Bad arguments or input data; maps to exit status 2."""


@dataclass
class RunConfig:
    input: str
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    d: float = 1.0
    r: int = 3
    draws: int = DEFAULT_DRAWS
    seed: int = 0
    level: float = 0.95
    drop_last: int = DEFAULT_DROP_LAST
    start_date: str | None = None
    out: str = "."
    format: str = "json"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in "abcd":
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InputError(f"--{name} must be positive, got {v}")
        if self.r < 1:
            raise InputError(f"--r must be a positive integer, got {self.r}")
        if not 0 < self.level < 1:
            raise InputError(f"--level must lie in (0, 1), got {self.level}")
        if self.draws < 1:
            raise InputError(f"--draws must be >= 1, got {self.draws}")
        if self.drop_last < 0:
            raise InputError(f"--drop-last must be >= 0, got {self.drop_last}")
        if self.seed < 0:
            raise InputError(f"--seed must be >= 0, got {self.seed}")

    @property
    def prior(self) -> PriorSpec:
        return PriorSpec(self.a, self.b, self.c, self.d, self.r)

    @property
    def start(self) -> dt.date | None:
        if self.start_date is None:
            return None
        try:
            return dt.date.fromisoformat(self.start_date)
        except ValueError:
            raise InputError(f"--start-date {self.start_date!r} is not an ISO date") from None

    def to_dict(self) -> dict:
        return asdict(self)


def _load(cfg: RunConfig) -> TestSeries:
    series = parse_report(cfg.input, drop_last=cfg.drop_last, start_date=cfg.start)
    if series.m == 0:
        raise InputError("no records left after --start-date/--drop-last")
    return series


def _path(cfg, name):
    os.makedirs(cfg.out, exist_ok=True)
    return os.path.join(cfg.out, name)


def _write_json(cfg, name, payload):
    with open(_path(cfg, name), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _write_csv(cfg, name, header, rows):
    with open(_path(cfg, name), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else repr(float(v))
    if isinstance(v, (dt.date, np.integer)):
        return str(v)
    return v


def _posterior_block(post):
    return {
        "m": post.stats.m, "X_m": post.stats.X, "N_m": post.stats.N,
        "a_m": post.a_m, "b_m": post.b_m, "c_m": post.c_m, "d_m": post.d_m,
        "p_hat_B": bayes_estimate_p(post), "theta_hat_B": bayes_estimate_theta(post),
    }


def cmd_summarize(cfg: RunConfig, r_sweep: bool = False):
    series = _load(cfg)
    summary = summarize_series(series)
    print(summary.table())
    payload = {"config": cfg.to_dict(), "summary": summary.as_dict()}
    if cfg.format == "csv":
        cols = (summary.tests, summary.positives, summary.ppt)
        _write_csv(cfg, "summary.csv", ["statistic", "COVID_TEST", "COVID_COUNT", "PPT"],
                   [[key] + [getattr(c, key) for c in cols] for key, _ in summary.STAT_LABELS])
    if r_sweep:
        stats = cumulative_stats(series)
        sweep = []
        for r in R_SWEEP:
            post = posterior_update(PriorSpec(cfg.a, cfg.b, cfg.c, cfg.d, r), stats)
            theta = bayes_estimate_theta(post)
            ov = negbinom_fit_overlay(series.tests, r, theta)
            chi2, dof = ov.chi_square()
            sweep.append({"r": r, "theta_hat_B": theta, "chi_square": chi2, "dof": dof})
            _write_csv(cfg, f"negbinom_overlay_r{r}.csv",
                       ["bin_lo", "bin_hi", "count", "fitted_prob", "expected"], ov.rows())
        payload["r_sweep"] = sweep
    if cfg.format == "json" or r_sweep:
        _write_json(cfg, "summary.json", payload)
    return summary


def cmd_predict(cfg: RunConfig, write_samples: bool = False, bins: int = 40):
    series = _load(cfg)
    post = posterior_update(cfg.prior, cumulative_stats(series))
    sample = simulate_predictive(post, cfg.draws, seed=cfg.seed)
    summary = summarize(sample, cfg.level)
    mu_k, var_k = predictive_moments_k(post)
    edges, counts, density, normal = pstar_histogram(sample, bins=bins)

    payload = {
        "config": cfg.to_dict(),
        "posterior": _posterior_block(post),
        "analytic": {"k_star_mean": mu_k, "k_star_variance": var_k,
                     "y_star_mean": mu_k * bayes_estimate_p(post)},
        "summary": summary.as_dict(),
        "histogram_normal": {"mu": summary.p_star.mean, "sigma": summary.p_star.sd},
    }
    if cfg.format == "json":
        _write_json(cfg, "predict.json", payload)
    else:
        _write_csv(cfg, "predict.csv", ["variable", "mean", "sd", "lower", "upper"], summary.rows())
        _write_json(cfg, "predict_meta.json", {k: v for k, v in payload.items() if k != "summary"})
    _write_csv(cfg, "pstar_histogram.csv", ["bin_lo", "bin_hi", "count", "density", "normal_pdf"],
               zip(edges[:-1], edges[1:], counts, density, normal))
    if write_samples:
        _write_csv(cfg, "pstar_samples.csv", ["p_star"], ([v] for v in sample.p_star))
    p = summary.p_star
    flag = "" if summary.sd_defined else "  (sd undefined: single draw)"
    print(f"p* mean {p.mean:.5f}  sd {p.sd:.5f}  {100 * cfg.level:g}% interval [{p.lower:.5f}, {p.upper:.5f}]{flag}")
    return summary


def cmd_backtest(cfg: RunConfig):
    series = _load(cfg)
    report = run_backtest(series, cfg.prior, cfg.level, cfg.draws, cfg.seed)
    header = ["n", "date", "lower", "upper", "realized_cumulative_ppt", "realized_daily_ppt",
              "hit_cumulative", "hit_daily"]
    _write_csv(cfg, "backtest.csv", header,
               ([r.n, r.date, r.lower, r.upper, r.realized_cumulative_ppt, r.realized_daily_ppt,
                 int(r.hit_cumulative), int(r.hit_daily)] for r in report.rows))
    _write_json(cfg, "backtest.json", {"config": cfg.to_dict(), "report": report.as_dict()})
    _write_csv(cfg, "backtest_chart.csv", ["date", "cumulative_ppt", "lower", "upper"],
               ([r.date, r.realized_cumulative_ppt, r.lower, r.upper] for r in report.rows))
    print(f"{len(report.rows)} days: coverage cumulative {report.coverage_cumulative:.3f}, "
          f"daily {report.coverage_daily:.3f}")
    return report


def cmd_plotdata(cfg: RunConfig):
    series = _load(cfg)
    dates = series.dates
    ppt = daily_ppt(series)
    ma = moving_average(ppt, MA_WINDOW)
    cum = np.cumsum(series.positives) / np.where(np.cumsum(series.tests) > 0, np.cumsum(series.tests), np.nan)
    header = ["date", "value", "flag", "threshold_10", "threshold_05"]

    def rows(values, flags):
        return ([d, v, f, *THRESHOLDS] for d, v, f in zip(dates, values, flags))

    undefined = ["undefined" if math.isnan(v) else "" for v in ppt]
    ma_flags = ["undefined" if math.isnan(v) else ("partial" if i < MA_WINDOW - 1 else "")
                for i, v in enumerate(ma)]
    cum_flags = ["undefined" if math.isnan(v) else "" for v in cum]
    _write_csv(cfg, "ppt.csv", header, rows(ppt, undefined))
    _write_csv(cfg, "moving_average.csv", header, rows(ma, ma_flags))
    _write_csv(cfg, "cumulative_ppt.csv", header, rows(cum, cum_flags))
    print(f"wrote plot data for {len(dates)} days to {cfg.out}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", required=True, help="daily report CSV (DATE, COVID_TEST, COVID_COUNT)")
    common.add_argument("--a", type=float, default=1.0, help="Beta prior a for the positivity rate")
    common.add_argument("--b", type=float, default=1.0, help="Beta prior b for the positivity rate")
    common.add_argument("--c", type=float, default=1.0, help="Beta prior c for theta")
    common.add_argument("--d", type=float, default=1.0, help="Beta prior d for theta")
    common.add_argument("--r", type=int, default=3, help="Negative-Binomial size for daily tests")
    common.add_argument("--draws", type=int, default=DEFAULT_DRAWS, help="Monte-Carlo sample size")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--level", type=float, default=0.95, help="interval coverage")
    common.add_argument("--drop-last", type=int, default=DEFAULT_DROP_LAST, help="trailing days to ignore")
    common.add_argument("--start-date", default=None, help="ignore records before this ISO date")
    common.add_argument("--out", "-o", default=".", help="output directory")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="positivity", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("summarize", parents=[common], help="descriptive statistics of the report")
    p.add_argument("--r-sweep", action="store_true", help="also emit Negative-Binomial overlays for r = 1..10")
    p = sub.add_parser("predict", parents=[common], help="next-day predictive summary")
    p.add_argument("--samples", action="store_true", help="write the raw p* draws")
    p.add_argument("--bins", type=int, default=40)
    sub.add_parser("backtest", parents=[common], help="rolling one-day-ahead interval check")
    sub.add_parser("plotdata", parents=[common], help="daily, moving-average and cumulative PPT series")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    opts = vars(args).copy()
    command = opts.pop("command")
    extra = {k: opts.pop(k) for k in ("r_sweep", "samples", "bins") if k in opts}
    try:
        cfg = RunConfig(**opts, extra=extra)
        if command == "summarize":
            cmd_summarize(cfg, r_sweep=extra["r_sweep"])
        elif command == "predict":
            cmd_predict(cfg, write_samples=extra["samples"], bins=extra["bins"])
        elif command == "backtest":
            cmd_backtest(cfg)
        else:
            cmd_plotdata(cfg)
    except (InputError, IngestError, ValidationError, SeriesTooShortError, OSError, IndexError) as exc:
        print(f"positivity: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"positivity: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
