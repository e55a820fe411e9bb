"""Shared array-table formats produced by the kernels.

A PTable holds the factorization of p - 1 for every prime p up to some limit,
as one flat ragged structure: row i spans fprimes[offsets[i]:offsets[i+1]] with
matching exponents. Both kernel backends produce and consume this layout.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np


class PTable(NamedTuple):
    primes: np.ndarray    # int64, ascending, all primes <= limit
    offsets: np.ndarray   # int64, len(primes) + 1
    fprimes: np.ndarray   # int64, concatenated factor primes of p - 1
    fexps: np.ndarray     # int64, matching exponents

    @property
    def limit_hint(self) -> int:
        return int(self.primes[-1]) if len(self.primes) else 1

    def row(self, i: int) -> tuple[tuple[int, int], ...]:
        s, e = int(self.offsets[i]), int(self.offsets[i + 1])
        return tuple(zip(self.fprimes[s:e].tolist(), self.fexps[s:e].tolist()))

    def index_of(self, p: int) -> int:
        i = int(np.searchsorted(self.primes, p))
        if i >= len(self.primes) or self.primes[i] != p:
            raise KeyError(f"{p} is not in the prime table")
        return i


def ragged_gather_indices(starts: np.ndarray, lens: np.ndarray) -> np.ndarray:
    """Flat indices selecting rows [starts[i], starts[i]+lens[i]) in order."""
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    ends = np.cumsum(lens)
    pos = np.arange(total, dtype=np.int64)
    within = pos - np.repeat(ends - lens, lens)
    return np.repeat(starts, lens) + within


def row_sums(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Sum of values over each ragged row; empty rows sum to zero.

    np.add.reduceat mishandles empty rows, so go through a cumulative sum.
    """
    csum = np.concatenate(([0], np.cumsum(values)))
    return csum[offsets[1:]] - csum[offsets[:-1]]
