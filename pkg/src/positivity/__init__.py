"""Conjugate Bayesian tracking and prediction of COVID-19 test positivity.

Daily positives are Binomial given the number of tests, daily tests are
Negative-Binomial, and both rates carry Beta priors.  The posterior then
depends on the data only through the cumulative counts, and next-day
predictions follow from Beta-Binomial and Beta-Negative-Binomial laws.
"""

from positivity.distributions import (
    BetaBinomialParams,
    BetaNegBinomialParams,
    DomainError,
    NegBinomialParams,
    beta_binomial_log_pmf,
    beta_negbinomial_log_pmf,
    joint_predictive_log_pmf,
    log_beta_fn,
    negbinomial_log_pmf,
    sample_beta,
    sample_beta_binomial,
    sample_beta_negbinomial,
    sample_binomial,
    sample_negbinomial,
)
from positivity.model import (
    PosteriorParams,
    PriorSpec,
    SufficientStats,
    ValidationError,
    bayes_estimate_p,
    bayes_estimate_theta,
    posterior_update,
    predictive_moments_k,
    predictive_moments_y,
)
from positivity.predictive import (
    EmpiricalCdf,
    PredictiveDraws,
    PredictiveSample,
    PredictiveSummary,
    empirical_cdf,
    percentile,
    prediction_interval,
    simulate_predictive,
    summarize,
)
from positivity.ingest import (
    DailyRecord,
    SeriesSummary,
    TestSeries,
    cumulative_stats,
    daily_ppt,
    moving_average,
    negbinom_fit_overlay,
    parse_report,
    summarize_series,
    write_report,
)
from positivity.backtest import BacktestReport, BacktestRow, run_backtest

__version__ = "0.1.0"
