"""Finite-shot Bell measurement: seeded multinomial sampling and exact
enumeration of every outcome tuple for small shot counts.

Randomness comes from counter-based Philox streams keyed by a
(master_seed, stream_index) pair, so parallel sweeps are bit-identical
regardless of evaluation order or thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np
from scipy.special import gammaln, xlogy

from .channels import BellProbs

#: Enumeration refuses to materialize more outcome tuples than this.
DEFAULT_ENUMERATION_CAP = 2_000_000

_MASK64 = (1 << 64) - 1


class EnumerationCapError(ValueError):
    """The requested outcome enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class SeedSpec:
    """Reproducible stream identity: one master seed, one stream per index.

    Distinct stream indices key statistically independent Philox streams,
    with no sequential coupling between them.
    """

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        key = (int(self.master_seed) & _MASK64) | ((int(self.stream_index) & _MASK64) << 64)
        return np.random.Generator(np.random.Philox(key=key))

    def with_stream(self, stream_index: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, stream_index)


@dataclass(frozen=True)
class OutcomeCounts:
    """Tallies of Bell-measurement outcomes over ``n_shots`` rounds."""

    counts: tuple[int, ...]
    n_shots: int

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise ValueError(f"counts must be non-negative, got {counts}")
        if sum(counts) != int(self.n_shots):
            raise ValueError(f"counts {counts} do not sum to n_shots = {self.n_shots}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "n_shots", int(self.n_shots))

    def as_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=float)

    def frequencies(self) -> np.ndarray:
        return self.as_array() / self.n_shots


def sample_counts(probs: BellProbs, n_shots: int, seed: SeedSpec) -> OutcomeCounts:
    """Draw one multinomial outcome vector, deterministically in ``seed``."""
    n = int(n_shots)
    if n < 1:
        raise ValueError("n_shots must be at least 1")
    drawn = seed.generator().multinomial(n, probs.as_array())
    return OutcomeCounts(tuple(int(c) for c in drawn), n)


def n_outcomes(k: int, n_shots: int) -> int:
    """Number of ways to split n_shots among k outcomes (stars and bars)."""
    return math.comb(n_shots + k - 1, k - 1)


def enumerate_outcomes(
    k: int, n_shots: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[tuple[int, ...]]:
    """Yield every composition of ``n_shots`` into ``k`` parts exactly once.

    Order is lexicographic in the first component; raises
    :class:`EnumerationCapError` when the outcome count exceeds ``cap``.
    """
    k = int(k)
    n = int(n_shots)
    if k < 2:
        raise ValueError("k must be at least 2")
    if n < 0:
        raise ValueError("n_shots must be non-negative")
    total = n_outcomes(k, n)
    if total > cap:
        raise EnumerationCapError(f"{total} outcomes exceed the cap of {cap}")

    def _compositions(remaining: int, parts: int) -> Iterator[tuple[int, ...]]:
        if parts == 1:
            yield (remaining,)
            return
        for first in range(remaining + 1):
            for rest in _compositions(remaining - first, parts - 1):
                yield (first,) + rest

    return _compositions(n, k)


@lru_cache(maxsize=64)
def all_outcomes(k: int, n_shots: int) -> np.ndarray:
    """Materialized composition table, shape (n_outcomes, k); cached and read-only."""
    table = np.array(list(enumerate_outcomes(k, n_shots)), dtype=np.int64)
    table.setflags(write=False)
    return table


def log_outcome_weights(counts: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Log multinomial weights log[ N!/(prod i_j!) * prod P_j^(i_j) ], rowwise.

    Computed in log space; zero-probability outcomes with zero counts
    contribute nothing (0 * log 0 = 0), while zero-probability outcomes
    with positive counts give -inf.
    """
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    n = counts.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_terms = xlogy(counts, probs)
    log_terms = np.where((counts == 0) & (probs == 0), 0.0, log_terms)
    return gammaln(n + 1.0) - gammaln(counts + 1.0).sum(axis=-1) + log_terms.sum(axis=-1)


def outcome_weight(counts: tuple[int, ...] | np.ndarray, probs: BellProbs | np.ndarray) -> float:
    """Multinomial probability of one outcome tuple under ``probs``."""
    parr = probs.as_array() if isinstance(probs, BellProbs) else np.asarray(probs, dtype=float)
    return float(np.exp(log_outcome_weights(np.asarray(counts, dtype=float), parr)))


def outcome_weights(counts: np.ndarray, probs: BellProbs | np.ndarray) -> np.ndarray:
    """Vectorized :func:`outcome_weight` over a composition table."""
    parr = probs.as_array() if isinstance(probs, BellProbs) else np.asarray(probs, dtype=float)
    return np.exp(log_outcome_weights(np.asarray(counts, dtype=float), parr))
