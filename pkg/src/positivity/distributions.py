"""Log-space pmfs and samplers for the count distributions of the model.

Negative-Binomial convention
----------------------------
Throughout this package ``NegBinom(r, theta)`` has pmf

    P(K = k) = C(k + r - 1, k) * theta**k * (1 - theta)**r,   k = 0, 1, ...

so ``theta`` is the probability attached to each *counted* event and the
mean is ``r * theta / (1 - theta)``.  This is the mirror image of the
convention used by ``scipy.stats.nbinom`` and ``numpy``'s
``negative_binomial`` (which take ``p = 1 - theta``).  Under it the
posterior mean of ``theta`` for daily test counts in the thousands sits
just below one.

All pmfs are evaluated in log space through log-Gamma ratios
``lnG(x + h) - lnG(x)``; no factorials are formed, and the ratios are
computed directly rather than as a difference of two large log-Gammas,
so posterior parameters around 10**5 to 10**7 keep about twelve digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln

__all__ = [
    "DomainError",
    "NegBinomialParams",
    "BetaBinomialParams",
    "BetaNegBinomialParams",
    "log_beta_fn",
    "binomial_log_pmf",
    "negbinomial_log_pmf",
    "beta_binomial_log_pmf",
    "beta_negbinomial_log_pmf",
    "joint_predictive_log_pmf",
    "sample_beta",
    "sample_binomial",
    "sample_negbinomial",
    "sample_beta_binomial",
    "sample_beta_negbinomial",
]

# numpy's Poisson sampler rejects rates above ~9.2e18.
_MAX_POISSON_RATE = 1.0e18


class DomainError(ValueError):
    """An argument lies outside the domain of a distribution or function."""


def _is_int(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def _check_positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class NegBinomialParams:
    """``NegBinom(size, theta)`` with mean ``size * theta / (1 - theta)``."""

    size: int
    theta: float

    def __post_init__(self):
        if not _is_int(self.size) or self.size < 1:
            raise DomainError(f"size must be a positive integer, got {self.size!r}")
        if not 0.0 < self.theta < 1.0:
            raise DomainError(f"theta must lie in (0, 1), got {self.theta!r}")

    @property
    def mean(self) -> float:
        return self.size * self.theta / (1.0 - self.theta)


@dataclass(frozen=True)
class BetaBinomialParams:
    """Beta-Binomial on ``0..trials`` with Beta(alpha, beta) mixing."""

    trials: int
    alpha: float
    beta: float

    def __post_init__(self):
        if not _is_int(self.trials) or self.trials < 0:
            raise DomainError(f"trials must be a non-negative integer, got {self.trials!r}")
        _check_positive("alpha", self.alpha)
        _check_positive("beta", self.beta)


@dataclass(frozen=True)
class BetaNegBinomialParams:
    """Beta-Negative-Binomial: ``theta ~ Beta(alpha, beta)``, then ``NegBinom(size, theta)``."""

    size: int
    alpha: float
    beta: float

    def __post_init__(self):
        if not _is_int(self.size) or self.size < 1:
            raise DomainError(f"size must be a positive integer, got {self.size!r}")
        _check_positive("alpha", self.alpha)
        _check_positive("beta", self.beta)


def log_beta_fn(x: float, y: float) -> float:
    """Natural log of the Beta function ``B(x, y)``.

    Backed by ``scipy.special.betaln``, which switches to an asymptotic
    expansion when one argument is large.  The naive
    ``lgamma(x) + lgamma(y) - lgamma(x + y)`` loses about eight digits
    at ``(1, 1e7)``.  Arguments are put in a canonical order first so the
    result is exactly symmetric.
    """
    if not (x > 0 and y > 0):
        raise DomainError(f"log_beta_fn needs positive arguments, got ({x!r}, {y!r})")
    if x < y:
        x, y = y, x
    return float(betaln(x, y))


def _log_choose(n: int, k: int) -> float:
    # log C(n, k) = -log(n + 1) - log B(k + 1, n - k + 1)
    return -math.log(n + 1) - log_beta_fn(k + 1, n - k + 1)


# Stirling correction lnG(z) - [(z - 1/2) ln z - z + ln(2 pi)/2], truncated
# after z**-11; absolute error below 1e-15 for z >= 10.
_STIRLING = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360)


def _stirling_tail(z: float) -> float:
    inv = 1.0 / z
    inv2 = inv * inv
    acc = 0.0
    for coef in reversed(_STIRLING):
        acc = acc * inv2 + coef
    return acc * inv


def _log_gamma_ratio(x: float, h: float) -> float:
    """``lnG(x + h) - lnG(x)`` without cancelling two large log-gammas."""
    if h == 0:
        return 0.0
    if x < 10.0:
        return float(gammaln(x + h) - gammaln(x))
    z = x + h
    return (x - 0.5) * math.log1p(h / x) + h * math.log(z) - h + _stirling_tail(z) - _stirling_tail(x)


def binomial_log_pmf(y: int, trials: int, p: float) -> float:
    """Log pmf of ``Binomial(trials, p)`` at ``y``."""
    if not _is_int(trials) or trials < 0:
        raise DomainError(f"trials must be a non-negative integer, got {trials!r}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    if not _is_int(y) or y < 0 or y > trials:
        raise DomainError(f"y={y!r} outside support 0..{trials}")
    if p == 0.0:
        return 0.0 if y == 0 else -math.inf
    if p == 1.0:
        return 0.0 if y == trials else -math.inf
    return _log_choose(trials, y) + y * math.log(p) + (trials - y) * math.log1p(-p)


def negbinomial_log_pmf(k: int, params: NegBinomialParams) -> float:
    """Log pmf of ``NegBinom(r, theta)`` at ``k`` (see module docstring for the convention)."""
    if not _is_int(k) or k < 0:
        raise DomainError(f"k must be a non-negative integer, got {k!r}")
    r, theta = params.size, params.theta
    return _log_choose(k + r - 1, k) + k * math.log(theta) + r * math.log1p(-theta)


def beta_binomial_log_pmf(y: int, params: BetaBinomialParams) -> float:
    """Log of ``C(k, y) B(y + alpha, beta + k - y) / B(alpha, beta)``.

    Raises :class:`DomainError` when ``y`` is outside ``0..trials`` rather
    than returning ``-inf``.
    """
    k = params.trials
    if not _is_int(y) or y < 0 or y > k:
        raise DomainError(f"y={y!r} outside support 0..{k}")
    a, b = params.alpha, params.beta
    # B(y + a, b + k - y) / B(a, b) as a product of Gamma ratios
    return (_log_choose(k, y) + _log_gamma_ratio(a, y) + _log_gamma_ratio(b, k - y)
            - _log_gamma_ratio(a + b, k))


def beta_negbinomial_log_pmf(k: int, params: BetaNegBinomialParams) -> float:
    """Log of ``C(k + r - 1, k) B(k + alpha, r + beta) / B(alpha, beta)``."""
    if not _is_int(k) or k < 0:
        raise DomainError(f"k must be a non-negative integer, got {k!r}")
    r, c, d = params.size, params.alpha, params.beta
    # B(k + c, r + d) / B(c, d) as a product of Gamma ratios
    return (_log_choose(k + r - 1, k) + _log_gamma_ratio(c, k) + _log_gamma_ratio(d, r)
            - _log_gamma_ratio(c + d, k + r))


def joint_predictive_log_pmf(
    y: int, k: int, bb: BetaBinomialParams, bnb: BetaNegBinomialParams
) -> float:
    """Log of the joint pmf of ``(Y*, K*)``: the conditional Beta-Binomial term plus the
    Beta-Negative-Binomial term.

    ``bb.trials`` must equal ``k``.
    """
    if bb.trials != k:
        raise DomainError(f"bb.trials={bb.trials} does not match k={k}")
    if _is_int(y) and _is_int(k) and y > k:
        raise DomainError(f"y={y} exceeds k={k}")
    return beta_binomial_log_pmf(y, bb) + beta_negbinomial_log_pmf(k, bnb)


# -- samplers -------------------------------------------------------------
#
# The primitive Beta/Binomial/Gamma/Poisson variates come from numpy's
# Generator (Beta from a ratio of Gammas, Binomial by inversion for small
# n*p and BTPE otherwise).  The compound laws are built here by mixing.


def sample_beta(rng: np.random.Generator, alpha, beta, size=None):
    """Draw from ``Beta(alpha, beta)``."""
    if np.any(np.asarray(alpha) <= 0) or np.any(np.asarray(beta) <= 0):
        raise DomainError("Beta shape parameters must be positive")
    return rng.beta(alpha, beta, size=size)


def sample_binomial(rng: np.random.Generator, trials, p, size=None):
    """Draw from ``Binomial(trials, p)``; ``trials`` and ``p`` may be arrays."""
    t = np.asarray(trials)
    pp = np.asarray(p)
    if np.any(t < 0) or not np.issubdtype(t.dtype, np.integer):
        raise DomainError("trials must be non-negative integers")
    if np.any((pp < 0) | (pp > 1)) or np.any(np.isnan(pp)):
        raise DomainError("p must lie in [0, 1]")
    return rng.binomial(trials, p, size=size)


def _negbinomial_from_complement(rng, size_r, phi, size=None):
    # phi = 1 - theta; gamma-Poisson mixture with rate Gamma(r, theta / phi).
    phi = np.maximum(phi, np.finfo(float).tiny)
    rate = rng.gamma(size_r, (1.0 - phi) / phi, size=size)
    return rng.poisson(np.minimum(rate, _MAX_POISSON_RATE))


def sample_negbinomial(rng: np.random.Generator, params: NegBinomialParams, size=None):
    """Draw from ``NegBinom(r, theta)`` with mean ``r * theta / (1 - theta)``."""
    return _negbinomial_from_complement(rng, params.size, 1.0 - params.theta, size=size)


def sample_beta_binomial(rng: np.random.Generator, params: BetaBinomialParams, size=None):
    """``p ~ Beta(alpha, beta)`` then ``Binomial(trials, p)``."""
    p = rng.beta(params.alpha, params.beta, size=size)
    return rng.binomial(params.trials, p)


def sample_beta_negbinomial(rng: np.random.Generator, params: BetaNegBinomialParams, size=None):
    """``theta ~ Beta(alpha, beta)`` then ``NegBinom(size, theta)``.

    The complement ``1 - theta ~ Beta(beta, alpha)`` is drawn directly, which
    keeps full relative precision when ``theta`` is within 1e-3 of one.
    """
    phi = rng.beta(params.beta, params.alpha, size=size)
    return _negbinomial_from_complement(rng, params.size, phi)
