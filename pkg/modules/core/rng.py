"""
rng.py - Seedable, counter-based random streams

An RngStream names a (seed, stream_id) pair. Generators are derived with a
numpy SeedSequence whose spawn key carries the stream id, feeding the
counter-based Philox bit generator, so iteration s of a power analysis always
sees the same draws no matter which worker runs it or in what order.

Changes:
- Initial implementation of RngStream on top of numpy Philox
- Added child() for per-component substreams (common random numbers)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from modules.core.errors import DomainError

_UINT64_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class RngStream:
    """
    A reproducible random stream.

    Attributes:
        seed (int): 64-bit unsigned root seed
        stream_id (int): 64-bit unsigned stream identifier
        path (tuple): Extra spawn-key components for substreams
    """

    seed: int
    stream_id: int = 0
    path: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for name, value in (("seed", self.seed), ("stream_id", self.stream_id)):
            if not 0 <= int(value) <= _UINT64_MAX:
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {value}")

    @property
    def spawn_key(self) -> Tuple[int, ...]:
        return (int(self.stream_id),) + tuple(int(k) for k in self.path)

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(int(self.seed), spawn_key=self.spawn_key)

    def generator(self) -> np.random.Generator:
        """
        Build a fresh generator positioned at the start of this stream.

        Returns:
            numpy.random.Generator: Philox-backed generator
        """
        return np.random.Generator(np.random.Philox(self.seed_sequence()))

    def child(self, *keys: int) -> "RngStream":
        """Derive an independent substream identified by extra key components."""
        return RngStream(self.seed, self.stream_id, self.path + tuple(int(k) for k in keys))

    def for_iteration(self, s: int) -> "RngStream":
        """The stream owned by iteration s (same seed, stream_id = s)."""
        return RngStream(self.seed, int(s), self.path)


def as_generator(rng) -> np.random.Generator:
    """
    Accept an RngStream, a numpy Generator or an integer seed.

    Args:
        rng: RngStream, numpy.random.Generator, or int

    Returns:
        numpy.random.Generator: A generator to draw from
    """
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"Expected RngStream, numpy Generator or int seed, got {type(rng).__name__}")
