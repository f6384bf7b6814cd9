"""Seeded counter-based random streams (Philox); no global randomness."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


def make_rng(seed, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by ``(seed, stream)``.

    Distinct ``stream`` values give independent sequences for the same seed,
    so trial ``i`` of an experiment can be replayed in isolation.
    """
    if seed is None:
        raise ParameterError("an explicit integer seed is required")
    return np.random.Generator(np.random.Philox(key=[int(seed), int(stream)]))


def subsample(items, limit: int | None):
    """Evenly strided deterministic subsample of at most ``limit`` items."""
    items = list(items)
    if limit is None or len(items) <= limit:
        return items
    idx = np.unique(np.linspace(0, len(items) - 1, limit).round().astype(int))
    return [items[i] for i in idx]
