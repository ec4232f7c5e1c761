"""Frame sequences: the common input of every estimator."""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import FrozenSet, Optional, Tuple

import numpy as np

from .exceptions import ConfigurationException


class Channels(str, Enum):
    """Channel layout of a frame sequence."""

    GRAY = "gray"
    RGB = "rgb"


class ProvenanceKind(str, Enum):
    SYNTHETIC = "synthetic"
    INGESTED = "ingested"
    DECOMPRESSED = "decompressed"


@dataclass(frozen=True)
class Provenance:
    """Where a sequence came from; `compression` is a CompressionSpec label."""

    kind: ProvenanceKind = ProvenanceKind.SYNTHETIC
    compression: Optional[str] = None

    @classmethod
    def decompressed(cls, label: str) -> "Provenance":
        return cls(ProvenanceKind.DECOMPRESSED, label)

    def describe(self) -> str:
        if self.kind is ProvenanceKind.DECOMPRESSED:
            return f"decompressed({self.compression})"
        return self.kind.value


DEGENERATE_RANGE = "degenerate_range"


@dataclass(frozen=True)
class FrameSequence:
    """
    Time-ordered stack of 8-bit intensity frames.

    Attributes:
        frames: uint8 array of shape (N, ny, nx) for gray or (N, ny, nx, 3) for rgb
        dt: frame interval in abstract time units
        pixel_pitch: camera pixel pitch (metadata)
        channels: channel layout
        provenance: origin of the data
        flags: processing notes such as a degenerate quantization range
    """

    frames: np.ndarray
    dt: float = 1.0
    pixel_pitch: float = 1.0
    channels: Channels = Channels.GRAY
    provenance: Provenance = field(default_factory=Provenance)
    flags: FrozenSet[str] = frozenset()

    def __post_init__(self):
        frames = self.frames
        if not isinstance(frames, np.ndarray) or frames.dtype != np.uint8:
            raise ConfigurationException("frames must be a uint8 numpy array")
        expected_ndim = 3 if self.channels is Channels.GRAY else 4
        if frames.ndim != expected_ndim:
            raise ConfigurationException(
                f"{self.channels.value} frames need {expected_ndim} dimensions, got shape {frames.shape}"
            )
        if self.channels is Channels.RGB and frames.shape[-1] != 3:
            raise ConfigurationException(f"rgb frames need 3 channels, got shape {frames.shape}")
        if frames.shape[0] < 1:
            raise ConfigurationException("sequence holds no frames")
        if self.dt <= 0:
            raise ConfigurationException(f"dt must be positive, got {self.dt}")

    @property
    def n_frames(self) -> int:
        return int(self.frames.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        """Frame size as (ny, nx)."""
        return int(self.frames.shape[1]), int(self.frames.shape[2])

    @property
    def is_gray(self) -> bool:
        return self.channels is Channels.GRAY

    def with_frames(self, frames: np.ndarray, **changes) -> "FrameSequence":
        """Copy with new pixel data, keeping metadata unless overridden."""
        return replace(self, frames=frames, **changes)

    def time_reversed(self) -> "FrameSequence":
        return self.with_frames(np.ascontiguousarray(self.frames[::-1]))

    def subsequence(self, start: int, stop: int) -> "FrameSequence":
        return self.with_frames(np.ascontiguousarray(self.frames[start:stop]))
