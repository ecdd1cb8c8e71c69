"""Seeded, stream-split random number generation.

Every randomized routine takes an integer seed and derives independent
substreams from it, so that (seed, stream) always reproduces the same draws.
"""

import random
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngSeed:
    seed: int
    stream: tuple[int, ...] = ()

    def child(self, *stream: int) -> "RngSeed":
        return RngSeed(self.seed, self.stream + tuple(stream))

    def numpy(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed & (2**64 - 1), spawn_key=self.stream)
        return np.random.default_rng(ss)

    def python(self) -> random.Random:
        ss = np.random.SeedSequence(self.seed & (2**64 - 1), spawn_key=self.stream)
        state = ss.generate_state(2, dtype=np.uint64)
        return random.Random(int(state[0]) << 64 | int(state[1]))


def as_seed(seed) -> RngSeed:
    if isinstance(seed, RngSeed):
        return seed
    return RngSeed(int(seed))


def make_rng(seed, *stream: int) -> random.Random:
    """Python RNG for (seed, stream). Accepts an int or an RngSeed."""
    return as_seed(seed).child(*stream).python()


def sub_seed(rng: random.Random) -> int:
    """Draw a fresh 63-bit seed from an existing generator."""
    return rng.getrandbits(63)
