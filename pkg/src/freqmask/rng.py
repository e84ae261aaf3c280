"""Seedable random streams.

Every stochastic step in the package draws from a :class:`RandomStream`.
Streams are built on numpy's counter-based Philox generator, keyed by a
64-bit seed plus a tuple of integer keys, so a substream is a pure function
of ``(seed, keys)`` and never of how much another stream has consumed.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "RandomStream",
    "derive_seed",
    "derive_substream",
    "sample_without_replacement",
    "uniform_int",
    "uniform_real",
]

_MASK64 = (1 << 64) - 1


class RandomStream:
    """Single-owner random stream. Do not share between threads; derive instead."""

    def __init__(self, seed: int, key: tuple[int, ...] = ()):
        seed = int(seed)
        if seed < 0 or seed > _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if any(int(k) < 0 for k in key):
            raise ValueError("substream keys must be non-negative integers")
        self.seed = seed
        self.key = tuple(int(k) for k in key)
        seq = np.random.SeedSequence(entropy=seed, spawn_key=self.key)
        self._gen = np.random.Generator(np.random.Philox(seq))

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, key={self.key})"

    def derive_substream(self, *keys: int) -> "RandomStream":
        return RandomStream(self.seed, self.key + tuple(keys))

    def uniform_real(self) -> float:
        return float(self._gen.random())

    def uniform(self, lo: float, hi: float) -> float:
        if lo > hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + (hi - lo) * self.uniform_real()

    def uniform_int(self, lo: int, hi: int) -> int:
        """Integer uniform on the closed range ``[lo, hi]``."""
        if lo > hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return int(self._gen.integers(lo, hi, endpoint=True))

    def normal(self, shape) -> np.ndarray:
        return self._gen.standard_normal(shape)

    def permutation(self, n: int) -> np.ndarray:
        """Uniformly shuffled ``arange(n)`` (full Fisher-Yates)."""
        n = int(n)
        if n < 0:
            raise ValueError("population size must be non-negative")
        idx = np.arange(n, dtype=np.int64)
        _partial_shuffle(self._gen, idx, max(n - 1, 0))
        return idx

    def sample_without_replacement(self, n: int, k: int) -> np.ndarray:
        """Draw ``k`` distinct indices from ``range(n)`` as an unordered set.

        Partial Fisher-Yates over an index array. When ``k > n/2`` only the
        ``n - k`` excluded indices are drawn and the untouched tail of the
        array is returned, so the cost is ``O(min(k, n - k))`` swaps.
        """
        n, k = int(n), int(k)
        if k < 0 or n < 0:
            raise ValueError("population and sample size must be non-negative")
        if k > n:
            raise ValueError(f"cannot sample {k} items from a population of {n}")
        idx = np.arange(n, dtype=np.int64)
        if 2 * k <= n:
            _partial_shuffle(self._gen, idx, k)
            return idx[:k].copy()
        drop = n - k
        _partial_shuffle(self._gen, idx, drop)
        return idx[drop:].copy()


def _partial_shuffle(gen: np.random.Generator, idx: np.ndarray, count: int) -> None:
    n = idx.shape[0]
    if count == 0:
        return
    offsets = np.arange(count)
    # j_i uniform on [i, n-1]
    targets = offsets + gen.integers(0, n - offsets)
    for i, j in zip(offsets.tolist(), targets.tolist()):
        idx[i], idx[j] = idx[j], idx[i]


def derive_seed(seed: int, *keys: int) -> int:
    """64-bit integer seed that is a pure function of ``(seed, keys)``."""
    lo, hi = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(keys)).generate_state(2, np.uint32)
    return (int(hi) << 32) | int(lo)


def derive_substream(stream: RandomStream, *keys: int) -> RandomStream:
    return stream.derive_substream(*keys)


def sample_without_replacement(stream: RandomStream, population_size: int, sample_size: int) -> np.ndarray:
    return stream.sample_without_replacement(population_size, sample_size)


def uniform_real(stream: RandomStream) -> float:
    return stream.uniform_real()


def uniform_int(stream: RandomStream, lo: int, hi: int) -> int:
    return stream.uniform_int(lo, hi)
