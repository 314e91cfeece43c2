"""Seeded random streams.

All sampling goes through :class:`numpy.random.Generator` backed by PCG64.
Child streams are derived with :class:`numpy.random.SeedSequence` from the
master seed plus integer keys, so a stream for e.g. backtest day ``n`` can
be replayed without running the days before it.
"""

from __future__ import annotations

import numpy as np



def make_rng(seed=None) -> np.random.Generator:
    """Return a PCG64 generator.

    An existing ``Generator`` is passed through unchanged so callers can
    thread one stream through several calls.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(seed))


def child_rng(seed: int, *keys: int) -> np.random.Generator:
    """Generator for the sub-stream addressed by ``(seed, *keys)``."""
    if seed is None:
        raise ValueError("child streams need an explicit integer seed")
    entropy = [int(seed), *(int(k) for k in keys)]
    if any(e < 0 for e in entropy):
        raise ValueError("seed and keys must be non-negative integers")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
