"""Counter-based random streams for reproducible speckle synthesis.

Each stream is a Philox generator keyed by ``(stream << 64) | seed``. Stream 0
holds the initial phase of the object grid; stream ``i >= 1`` holds the phase
increments of frame ``i``. Within a stream the draws are taken in row-major
order, one 64-bit word per grid point, so any pixel's draw can be reproduced
without generating the words before it.
"""
import numpy as np
from scipy.special import ndtri

from .exceptions import ConfigurationException

INITIAL_PHASE_STREAM = 0

_WORDS_PER_BLOCK = 4  # Philox4x64 emits four 64-bit words per counter value
_MANTISSA_SCALE = 2.0 ** -53


class CounterRng:
    """Seedable counter-based generator with random access inside a stream."""

    def __init__(self, seed: int):
        if not 0 <= int(seed) < 2 ** 64:
            raise ConfigurationException(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)

    def raw(self, stream: int, count: int, offset: int = 0) -> np.ndarray:
        """
        Get raw 64-bit words ``offset .. offset + count - 1`` of a stream.

        Args:
            stream: Stream index (0 = initial phase, i = increments of frame i)
            count: Number of words
            offset: Index of the first word inside the stream

        Returns:
            uint64 array of length count
        """
        if stream < 0 or offset < 0 or count < 0:
            raise ConfigurationException("stream, offset and count must be non-negative")
        block, skip = divmod(offset, _WORDS_PER_BLOCK)
        bitgen = np.random.Philox(key=(int(stream) << 64) | self.seed, counter=block)
        if count == 0:
            return np.empty(0, dtype=np.uint64)
        words = bitgen.random_raw(count + skip)
        return np.asarray(words[skip:], dtype=np.uint64)

    def uniforms(self, stream: int, count: int, offset: int = 0) -> np.ndarray:
        """Uniform doubles on [0, 1) from the top 53 bits of each word."""
        return (self.raw(stream, count, offset) >> np.uint64(11)).astype(np.float64) * _MANTISSA_SCALE

    def normals(self, stream: int, count: int, offset: int = 0) -> np.ndarray:
        """Standard normal draws through the inverse CDF of open-interval uniforms."""
        mantissa = (self.raw(stream, count, offset) >> np.uint64(11)).astype(np.float64)
        return ndtri((mantissa + 0.5) * _MANTISSA_SCALE)
