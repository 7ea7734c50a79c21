"""Keyed, counter-based random streams.

Every stream is a Philox4x64 generator whose 128-bit key is built from
``(master_seed, coordinate, epoch)``.  Coordinate 0 feeds the data, coordinate
``i >= 1`` feeds the weights of bootstrap replicate ``i``; the epoch indexes
the outer Monte Carlo repetition.  Distinct keys select distinct Philox
permutations, so streams never share counter ranges and a stream's content
depends on nothing but its key.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1
_TWO_POW_M53 = 1.0 / 9007199254740992.0
MAX_COORDINATE = (1 << 32) - 1
MAX_EPOCH = (1 << 32) - 1


@dataclass(frozen=True)
class StreamKey:
    master_seed: int
    coordinate: int = 0
    epoch: int = 0

    def __post_init__(self):
        if not 0 <= self.coordinate <= MAX_COORDINATE:
            raise ValueError(f"coordinate must lie in [0, 2**32), got {self.coordinate}")
        if not 0 <= self.epoch <= MAX_EPOCH:
            raise ValueError(f"epoch must lie in [0, 2**32), got {self.epoch}")

    def philox_key(self) -> np.ndarray:
        word0 = self.master_seed & _MASK64
        word1 = (self.epoch << 32) | self.coordinate
        return np.array([word0, word1], dtype=np.uint64)


class Stream:
    """Sequential reader over one keyed Philox stream.

    All variates are deterministic transforms of whole 64-bit words, one word
    per variate, so consumption is a pure function of the number of draws.
    """

    def __init__(self, key: StreamKey):
        self.key = key
        self._bitgen = np.random.Philox(key=key.philox_key())

    def words(self, size: int) -> np.ndarray:
        return self._bitgen.random_raw(size)

    def uniform(self, size: int | None = None):
        """Uniform draws on [0, 1) with 53 bits of resolution."""
        w = self.words(1 if size is None else size)
        u = (w >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53
        return float(u[0]) if size is None else u

    def open_uniform(self, size: int | None = None):
        # midpoint of each 2**-53 cell: strictly inside (0, 1)
        w = self.words(1 if size is None else size)
        u = ((w >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_POW_M53
        return float(u[0]) if size is None else u

    def normal(self, size: int | None = None):
        """Standard normal draws by inversion of open-interval uniforms."""
        z = ndtri(self.open_uniform(1 if size is None else size))
        return float(z[0]) if size is None else z

    def exponential(self, size: int | None = None):
        e = -np.log(self.open_uniform(1 if size is None else size))
        return float(e[0]) if size is None else e

    def integers(self, high: int, size: int) -> np.ndarray:
        """Uniform integers on {0, ..., high - 1}."""
        if high < 1:
            raise ValueError("high must be >= 1")
        idx = np.floor(self.uniform(size) * high).astype(np.int64)
        return np.minimum(idx, high - 1)

    def signs(self, size: int) -> np.ndarray:
        """Rademacher draws (+1/-1) from the top bit of each word."""
        top = (self.words(size) >> np.uint64(63)).astype(np.float64)
        return 1.0 - 2.0 * top


def derive_stream(key: StreamKey) -> Stream:
    return Stream(key)


def std_uniform(stream: Stream, size: int | None = None):
    return stream.uniform(size)


def std_normal(stream: Stream, size: int | None = None):
    return stream.normal(size)


def derive_seed(master_seed: int, *labels: int | str) -> int:
    """Hash a master seed and labels into a fresh 64-bit seed.

    Used to give each experiment cell (and each oracle simulation) its own
    key space so that ``(coordinate, epoch)`` can restart from zero inside it.
    """
    entropy = [master_seed & _MASK64]
    for label in labels:
        if isinstance(label, str):
            raw = label.encode("utf-8")
            entropy.append(len(raw))
            entropy.extend(raw)
        else:
            entropy.append(int(label) & _MASK64)
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0])
