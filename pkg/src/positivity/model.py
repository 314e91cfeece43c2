"""Conjugate Beta priors, sufficient statistics and the posterior update.

Given ``m`` days with tests ``k_i`` and positives ``y_i`` the likelihood
is proportional to ``p**X (1-p)**(N-X) theta**N (1-theta)**(m r)`` with
``X = sum(y_i)`` and ``N = sum(k_i)``.  With ``p ~ Beta(a, b)`` and
``theta ~ Beta(c, d)`` the posterior is again a product of Betas.
"""

from __future__ import annotations

import math
import numbers
import warnings
from dataclasses import dataclass
from typing import NamedTuple

from positivity.distributions import BetaBinomialParams, BetaNegBinomialParams

__all__ = [
    "ValidationError",
    "UndefinedMomentWarning",
    "PriorSpec",
    "SufficientStats",
    "PosteriorParams",
    "Moments",
    "posterior_update",
    "bayes_estimate_p",
    "bayes_estimate_theta",
    "predictive_moments_y",
    "predictive_moments_k",
]


class ValidationError(ValueError):
    """Model inputs violate their invariants."""


class UndefinedMomentWarning(RuntimeWarning):
    """A requested predictive moment does not exist (reported as ``inf``)."""


class Moments(NamedTuple):
    mean: float
    variance: float


def _positive(name, v):
    if isinstance(v, bool) or not isinstance(v, numbers.Real) or not (math.isfinite(v) and v > 0):
        raise ValidationError(f"{name} must be positive and finite, got {v!r}")


def _nonneg_int(name, v):
    if isinstance(v, bool) or not isinstance(v, numbers.Integral) or v < 0:
        raise ValidationError(f"{name} must be a non-negative integer, got {v!r}")


@dataclass(frozen=True)
class PriorSpec:
    """Hyperparameters: ``p ~ Beta(a, b)``, ``theta ~ Beta(c, d)``, Negative-Binomial size ``r``."""

    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    d: float = 1.0
    r: int = 3

    def __post_init__(self):
        for name in "abcd":
            _positive(name, getattr(self, name))
        _nonneg_int("r", self.r)
        if self.r < 1:
            raise ValidationError(f"r must be >= 1, got {self.r}")


@dataclass(frozen=True)
class SufficientStats:
    """Day count ``m``, cumulative positives ``X`` and cumulative tests ``N``."""

    m: int
    X: int
    N: int

    def __post_init__(self):
        _nonneg_int("m", self.m)
        _nonneg_int("X", self.X)
        _nonneg_int("N", self.N)
        if self.X > self.N:
            raise ValidationError(f"X={self.X} exceeds N={self.N}")
        if self.m == 0 and (self.X or self.N):
            raise ValidationError("m=0 requires X=N=0")

    def add_day(self, positives: int, tests: int) -> "SufficientStats":
        """Fold one more day into the totals."""
        return SufficientStats(self.m + 1, self.X + positives, self.N + tests)

    @property
    def cumulative_ppt(self) -> float:
        """``X / N`` (nan when no tests have been recorded)."""
        return self.X / self.N if self.N else math.nan


@dataclass(frozen=True)
class PosteriorParams:
    a_m: float
    b_m: float
    c_m: float
    d_m: float
    prior: PriorSpec
    stats: SufficientStats

    @property
    def r(self) -> int:
        return self.prior.r

    def beta_binomial(self, k_star: int) -> BetaBinomialParams:
        """Predictive law of positives out of ``k_star`` new tests."""
        return BetaBinomialParams(int(k_star), self.a_m, self.b_m)

    def beta_negbinomial(self) -> BetaNegBinomialParams:
        """Predictive law of the next day's number of tests."""
        return BetaNegBinomialParams(self.r, self.c_m, self.d_m)


def posterior_update(prior: PriorSpec, stats: SufficientStats) -> PosteriorParams:
    """Conjugate update.

    >>> post = posterior_update(PriorSpec(1, 1, 1, 1, r=3), SufficientStats(109, 46907, 522946))
    >>> post.a_m, post.b_m, post.c_m, post.d_m
    (46908, 476040, 522947, 328)
    """
    if stats.X > stats.N:
        raise ValidationError(f"X={stats.X} exceeds N={stats.N}")
    return PosteriorParams(
        a_m=prior.a + stats.X,
        b_m=prior.b + stats.N - stats.X,
        c_m=prior.c + stats.N,
        d_m=prior.d + stats.m * prior.r,
        prior=prior,
        stats=stats,
    )


def bayes_estimate_p(post: PosteriorParams) -> float:
    """Posterior mean of the positivity rate, ``a_m / (a_m + b_m)``."""
    return post.a_m / (post.a_m + post.b_m)


def bayes_estimate_theta(post: PosteriorParams) -> float:
    """Posterior mean of ``theta``, ``c_m / (c_m + d_m) = (c + N) / (c + d + N + m r)``."""
    return post.c_m / (post.c_m + post.d_m)


def predictive_moments_y(post: PosteriorParams, k_star: int) -> Moments:
    """Mean and variance of next-day positives given ``k_star`` tests."""
    if k_star < 0:
        raise ValidationError(f"k_star must be non-negative, got {k_star}")
    p_hat = bayes_estimate_p(post)
    s = post.a_m + post.b_m
    return Moments(k_star * p_hat, k_star * p_hat * (1.0 - p_hat) * (s + k_star) / (s + 1.0))


def predictive_moments_k(post: PosteriorParams) -> Moments:
    """Mean and variance of the next day's test count.

    The Beta-Negative-Binomial has a polynomial tail: the mean is finite
    only for ``d_m > 1`` and the variance only for ``d_m > 2``.  Moments
    that do not exist are returned as ``inf`` and an
    :class:`UndefinedMomentWarning` is emitted.
    """
    r, c, d = post.r, post.c_m, post.d_m
    if d <= 1:
        warnings.warn(f"predictive mean of K* is infinite for d_m={d} <= 1", UndefinedMomentWarning)
        return Moments(math.inf, math.inf)
    mean = r * c / (d - 1.0)
    if d <= 2:
        warnings.warn(f"predictive variance of K* is infinite for d_m={d} <= 2", UndefinedMomentWarning)
        return Moments(mean, math.inf)
    return Moments(mean, mean * (d + r - 1.0) * (c + d - 1.0) / ((d - 1.0) * (d - 2.0)))
