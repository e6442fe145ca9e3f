"""Seeded random streams.

A `RandomStream` is the only source of randomness in the package. It counts how
many variates of each kind were drawn so that callers can check how much of the
stream a mechanism consumed per label.
"""
from __future__ import annotations

import typing as t
from collections import Counter

import numpy as np
from numpy.typing import NDArray


def derive_seed(base: int, index: int) -> int:
    """Seed of the stream owning row (or shard) `index`."""
    return int(base) ^ int(index)


class RandomStream:
    """A numpy `Generator` bound to a seed, with per-kind draw counters."""

    def __init__(self, seed: int, *, spawn_key: t.Sequence[int] = ()) -> None:
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self._seed = int(seed)
        self._spawn_key = tuple(int(k) for k in spawn_key)
        sequence = np.random.SeedSequence(self._seed, spawn_key=self._spawn_key)
        self._generator = np.random.Generator(np.random.PCG64(sequence))
        self._counts: Counter[str] = Counter()

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def spawn_key(self) -> tuple[int, ...]:
        return self._spawn_key

    @property
    def counts(self) -> dict[str, int]:
        """Number of variates drawn so far, by kind."""
        return dict(self._counts)

    def drawn(self, kind: str) -> int:
        return self._counts[kind]

    def spawn(self, *key: int) -> RandomStream:
        """Independent child stream identified by `key` under the same seed."""
        return RandomStream(self._seed, spawn_key=self._spawn_key + key)

    def for_row(self, index: int) -> RandomStream:
        """Stream of the block starting at row `index`: seed XOR row index, same spawn key."""
        return RandomStream(derive_seed(self._seed, index), spawn_key=self._spawn_key)

    def merge_counts(self, counts: t.Mapping[str, int]) -> None:
        """Add draws made by derived streams to this stream's counters."""
        self._counts.update(counts)

    def _count(self, kind: str, size: int | tuple[int, ...] | None) -> None:
        self._counts[kind] += int(np.prod(size)) if size is not None else 1

    def uniform(
        self, low: float = 0.0, high: float = 1.0, size: int | None = None
    ) -> t.Any:
        self._count("uniform", size)
        return self._generator.uniform(low, high, size)

    def laplace(self, scale: float, size: int | None = None) -> t.Any:
        self._count("laplace", size)
        return self._generator.laplace(0.0, scale, size)

    def normal(self, scale: float = 1.0, size: int | tuple[int, ...] | None = None) -> t.Any:
        self._count("normal", size)
        return self._generator.normal(0.0, scale, size)

    def permutation(self, n: int) -> NDArray[np.int64]:
        self._count("permutation", None)
        return self._generator.permutation(n)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self._seed}, spawn_key={self._spawn_key})"
