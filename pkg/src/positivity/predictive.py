"""Monte-Carlo posterior prediction of next-day tests, positives and positivity.

Each draw takes ``K* ~ BetaNegBinom(r, c_m, d_m)``, then
``Y* ~ BetaBinom(K*, a_m, b_m)`` and reports ``p* = Y*/K*``.  The
predictive CDF of ``p*`` has no closed form and is estimated by the
empirical CDF of the draws; interval bounds are its order-statistic
percentiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from positivity.distributions import sample_beta, sample_beta_negbinomial, sample_binomial
from positivity.model import PosteriorParams
from positivity.rng import make_rng

__all__ = [
    "DEFAULT_DRAWS",
    "PredictiveSample",
    "PredictiveDraws",
    "EmpiricalCdf",
    "VariableSummary",
    "PredictiveSummary",
    "simulate_predictive",
    "empirical_cdf",
    "percentile",
    "prediction_interval",
    "summarize",
    "pstar_histogram",
]

DEFAULT_DRAWS = 5000


class PredictiveSample(NamedTuple):
    y_star: int
    k_star: int
    p_star: float


@dataclass(frozen=True)
class PredictiveDraws:
    """The simulated pairs, stored column-wise.

    Indexing and iteration yield :class:`PredictiveSample` tuples.
    ``resampled_zero_k`` counts ``K* = 0`` draws that were thrown away
    and redrawn (``p*`` is undefined for them).
    """

    y_star: np.ndarray
    k_star: np.ndarray
    resampled_zero_k: int = 0

    @property
    def p_star(self) -> np.ndarray:
        return self.y_star / self.k_star

    def __len__(self):
        return len(self.k_star)

    def __getitem__(self, i) -> PredictiveSample:
        y, k = int(self.y_star[i]), int(self.k_star[i])
        return PredictiveSample(y, k, y / k)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def simulate_predictive(post: PosteriorParams, draws: int = DEFAULT_DRAWS, seed=None) -> PredictiveDraws:
    """Draw ``draws`` samples of ``(Y*, K*, p*)`` from the posterior predictive.

    Parameters
    ----------
    post : PosteriorParams
        Updated hyperparameters.
    draws : int
        Number of Monte-Carlo samples ``B``.
    seed : int, SeedSequence or Generator, optional
        Passed to :func:`positivity.rng.make_rng`.  A fixed seed gives an
        identical result on every run.

    Returns
    -------
    PredictiveDraws
    """
    if isinstance(draws, bool) or int(draws) != draws or draws < 1:
        raise ValueError(f"draws must be a positive integer, got {draws!r}")
    rng = make_rng(seed)
    bnb = post.beta_negbinomial()

    k = np.asarray(sample_beta_negbinomial(rng, bnb, size=int(draws)), dtype=np.int64)
    discarded = 0
    zero = np.flatnonzero(k == 0)
    while zero.size:
        discarded += zero.size
        k[zero] = sample_beta_negbinomial(rng, bnb, size=zero.size)
        zero = zero[k[zero] == 0]

    p = sample_beta(rng, post.a_m, post.b_m, size=k.size)
    y = np.asarray(sample_binomial(rng, k, p), dtype=np.int64)
    return PredictiveDraws(y_star=y, k_star=k, resampled_zero_k=discarded)


@dataclass(frozen=True)
class EmpiricalCdf:
    """Right-continuous step CDF ``t -> #{x_i <= t} / B`` of a sorted sample."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("empirical CDF needs a non-empty 1-d sample")
        if np.isnan(v).any():
            raise ValueError("sample contains nan")
        object.__setattr__(self, "values", np.sort(v, kind="stable"))

    def __len__(self):
        return self.values.size

    def __call__(self, t):
        counts = np.searchsorted(self.values, t, side="right")
        return counts / self.values.size


def empirical_cdf(samples) -> EmpiricalCdf:
    """Build an :class:`EmpiricalCdf` from raw values or a :class:`PredictiveDraws` (uses ``p*``)."""
    if isinstance(samples, PredictiveDraws):
        samples = samples.p_star
    return EmpiricalCdf(np.asarray(samples, dtype=float))


def _as_fraction(alpha) -> Fraction:
    # repr() recovers the shortest decimal, so 0.975 means 39/40 rather than
    # the binary double just below it.
    if isinstance(alpha, Fraction):
        return alpha
    return Fraction(repr(float(alpha)))


def _order_index(alpha: Fraction, n: int) -> int:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {float(alpha)!r}")
    j = math.ceil(alpha * n)
    return max(j, 1)


def percentile(cdf: EmpiricalCdf, alpha) -> float:
    """``inf{t : cdf(t) >= alpha}``, i.e. the ``ceil(alpha * B)``-th order statistic.

    ``alpha`` is read as the decimal it prints as (``0.975 == 39/40``), so
    the index is exact for the usual interval levels.
    """
    j = _order_index(_as_fraction(alpha), len(cdf))
    return float(cdf.values[j - 1])


def prediction_interval(cdf: EmpiricalCdf, level: float = 0.95) -> tuple[float, float]:
    """Central interval with coverage ``level``: percentiles at ``(1-level)/2`` and ``(1+level)/2``."""
    lev = _as_fraction(level)
    if not 0 < lev < 1:
        raise ValueError(f"level must lie in (0, 1), got {level!r}")
    tail = (1 - lev) / 2
    return percentile(cdf, tail), percentile(cdf, 1 - tail)


@dataclass(frozen=True)
class VariableSummary:
    mean: float
    sd: float
    lower: float
    upper: float


@dataclass(frozen=True)
class PredictiveSummary:
    """Means, SDs and interval bounds of ``Y*``, ``K*`` and ``p*``.

    ``sd_defined`` is False when only one draw was made; the SDs are then
    reported as 0.
    """

    draws: int
    level: float
    y_star: VariableSummary
    k_star: VariableSummary
    p_star: VariableSummary
    resampled_zero_k: int = 0
    sd_defined: bool = True

    def as_dict(self) -> dict:
        out = {"draws": self.draws, "level": self.level,
               "resampled_zero_k": self.resampled_zero_k, "sd_defined": self.sd_defined}
        for name in ("y_star", "k_star", "p_star"):
            v = getattr(self, name)
            out[name] = {"mean": v.mean, "sd": v.sd, "lower": v.lower, "upper": v.upper}
        return out

    def rows(self):
        """Rows shaped like a (variable, mean, sd, lower, upper) table."""
        for name in ("y_star", "k_star", "p_star"):
            v = getattr(self, name)
            yield name, v.mean, v.sd, v.lower, v.upper


def _summarize_column(x: np.ndarray, level) -> VariableSummary:
    x = np.asarray(x, dtype=float)
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    lo, hi = prediction_interval(EmpiricalCdf(x), level)
    return VariableSummary(float(np.mean(x)), sd, lo, hi)


def summarize(samples: PredictiveDraws, level: float = 0.95) -> PredictiveSummary:
    """Table of sample means, SDs (divisor ``B - 1``) and ``level`` intervals."""
    if len(samples) == 0:
        raise ValueError("no samples to summarize")
    return PredictiveSummary(
        draws=len(samples),
        level=level,
        y_star=_summarize_column(samples.y_star, level),
        k_star=_summarize_column(samples.k_star, level),
        p_star=_summarize_column(samples.p_star, level),
        resampled_zero_k=samples.resampled_zero_k,
        sd_defined=len(samples) > 1,
    )


def pstar_histogram(samples: PredictiveDraws, bins: int = 40):
    """Histogram of ``p*`` plus the matching normal-approximation density.

    Returns ``(edges, counts, density, normal_pdf)`` where ``normal_pdf``
    is evaluated at the bin centres with the sample mean and SD.
    """
    p = samples.p_star
    counts, edges = np.histogram(p, bins=bins)
    widths = np.diff(edges)
    density = counts / (p.size * np.where(widths > 0, widths, 1.0))
    mu = float(p.mean())
    sigma = float(p.std(ddof=1)) if p.size > 1 else 0.0
    centres = 0.5 * (edges[:-1] + edges[1:])
    if sigma > 0:
        normal = np.exp(-0.5 * ((centres - mu) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
    else:
        normal = np.zeros_like(centres)
    return edges, counts, density, normal
