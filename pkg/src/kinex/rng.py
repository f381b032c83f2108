"""Deterministic random-number streams.

Every run is driven by one PCG64 generator derived from the pair
(master_seed, run_index).  The mixing function is numpy's SeedSequence
hash of that two-integer entropy pool, so distinct run indices give
statistically independent substreams and the mapping is stable across
platforms.

Draw-order contract for a run, in consumption order:

1. model initialization (quenched propensities, urn warm-up), exactly as
   documented by the initializer that performs it;
2. trade draws, produced in blocks of ``BLOCK`` trades.  Each block calls
   the generator three times: ``integers(0, n, BLOCK)`` for the first
   partner, ``integers(0, n - 1, BLOCK)`` for the second (shifted past
   the first to make the pair distinct), then ``random(BLOCK)`` for the
   split fraction epsilon.

The block layout means the draws backing trade t depend only on the seed
pair and t, never on how callers interleave single steps, bulk advances
or snapshot stops.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError

BLOCK = 1 << 16


def substream(master_seed: int, run_index: int) -> np.random.Generator:
    """Generator for one run of an ensemble keyed by (master_seed, run_index)."""
    if not 0 <= int(master_seed) < 2**64:
        raise DomainError(f"master seed must be a 64-bit unsigned integer, got {master_seed}")
    if run_index < 0:
        raise DomainError(f"run index must be nonnegative, got {run_index}")
    seq = np.random.SeedSequence([int(master_seed), int(run_index)])
    return np.random.Generator(np.random.PCG64(seq))


class TradeDrawStream:
    """Block-buffered source of (i, j, epsilon) draws for pairwise trades.

    ``take`` hands out contiguous views into the current block, so the
    hot loop never copies draw arrays; ``next_one`` serves single-trade
    consumers from the same buffer, keeping stepwise and bulk execution
    on one identical stream.
    """

    def __init__(self, rng: np.random.Generator, n_agents: int):
        if n_agents < 2:
            raise DomainError(f"need at least 2 agents to trade, got {n_agents}")
        self._rng = rng
        self._n = n_agents
        self._pos = BLOCK  # forces a refill on first use
        self._i = np.empty(0, dtype=np.int64)
        self._j = np.empty(0, dtype=np.int64)
        self._eps = np.empty(0, dtype=np.float64)

    @property
    def n_agents(self) -> int:
        return self._n

    def _refill(self) -> None:
        n = self._n
        i = self._rng.integers(0, n, size=BLOCK, dtype=np.int64)
        j = self._rng.integers(0, n - 1, size=BLOCK, dtype=np.int64)
        j += j >= i
        self._i, self._j, self._eps = i, j, self._rng.random(BLOCK)
        self._pos = 0

    def take(self, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Views over at most ``n`` buffered trades (at least 1)."""
        if n <= 0:
            raise DomainError(f"cannot take {n} draws")
        if self._pos >= BLOCK:
            self._refill()
        lo = self._pos
        hi = min(lo + n, BLOCK)
        self._pos = hi
        return self._i[lo:hi], self._j[lo:hi], self._eps[lo:hi]

    def next_one(self) -> tuple[int, int, float]:
        i, j, eps = self.take(1)
        return int(i[0]), int(j[0]), float(eps[0])
