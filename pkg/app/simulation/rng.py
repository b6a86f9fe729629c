"""
Seeded random streams.

Every consumer (mobility of one node, traffic, per-node jitter, ...) draws
from its own numpy PCG64 generator. The child seed is derived from the run
seed and a CRC32 of the stream id, never from Python's salted hash(), so
identical (seed, stream id) pairs give identical sequences on every platform.
"""
import math
import zlib
from typing import Dict, List

import numpy as np

from app.core.exceptions import RandomStreamError

RNG_ALGORITHM = f"numpy-{np.__version__.split('.')[0]}.PCG64"


class RngStream:
    """One independent draw sequence."""

    def __init__(self, seed: int, stream_id: str):
        self.seed = seed
        self.stream_id = stream_id
        key = zlib.crc32(stream_id.encode("utf-8")) & 0xFFFFFFFF
        sequence = np.random.SeedSequence(entropy=seed, spawn_key=(key,))
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform draw in [lo, hi); a zero-width interval returns lo."""
        if hi < lo:
            raise RandomStreamError(
                f"Inverted interval [{lo}, {hi}) on stream {self.stream_id!r}",
                error_code="INVERTED_INTERVAL",
                details={"lo": lo, "hi": hi, "stream": self.stream_id},
            )
        value = lo + (hi - lo) * float(self._generator.random())
        # rounding can land exactly on hi for very narrow intervals
        return value if value < hi or hi == lo else math.nextafter(hi, lo)

    def angle(self) -> float:
        return self.uniform(0.0, 2.0 * math.pi)

    def point_in_disk(self, radius: float) -> tuple[float, float]:
        """Uniform point in a disk of the given radius centred at the origin."""
        if radius <= 0:
            return 0.0, 0.0
        r = radius * math.sqrt(self.uniform(0.0, 1.0))
        theta = self.angle()
        return r * math.cos(theta), r * math.sin(theta)

    def sample_without_replacement(self, population: int, k: int) -> List[int]:
        if k > population:
            raise RandomStreamError(
                f"Cannot draw {k} distinct items from {population}",
                error_code="SAMPLE_TOO_LARGE",
            )
        return [int(i) for i in self._generator.permutation(population)[:k]]


class RngFactory:
    """Hands out streams of one run, creating each on first use."""

    def __init__(self, seed: int):
        self.seed = seed
        self._streams: Dict[str, RngStream] = {}

    def stream(self, stream_id: str) -> RngStream:
        stream = self._streams.get(stream_id)
        if stream is None:
            stream = RngStream(self.seed, stream_id)
            self._streams[stream_id] = stream
        return stream


def next_random(stream: RngStream, lo: float, hi: float) -> float:
    return stream.uniform(lo, hi)
