"""Sequence-level compression round trips, size reports and distortion measures."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from config import settings
from core.exceptions import CodecException
from core.frames import FrameSequence, Provenance
from .codec import decode_frame, encode_frame, reference_size, resolve_jpeg_quality
from .spec import CodecFormat, CompressionSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SizeReport:
    """Encoded sizes of every frame against the BMP reference size."""

    spec: CompressionSpec
    frame_bytes: np.ndarray
    reference_bytes: int
    resolved_quality: Optional[int] = None

    @property
    def ratios(self) -> np.ndarray:
        return self.reference_bytes / self.frame_bytes.astype(np.float64)

    @property
    def mean_bytes(self) -> float:
        return float(self.frame_bytes.mean())

    @property
    def mean_ratio(self) -> float:
        return float(self.ratios.mean())

    def summary(self) -> Dict:
        ratios = self.ratios
        return {
            "spec": str(self.spec),
            "frames": int(self.frame_bytes.size),
            "reference_bytes": int(self.reference_bytes),
            "mean_bytes": self.mean_bytes,
            "mean_ratio": float(ratios.mean()),
            "min_ratio": float(ratios.min()),
            "max_ratio": float(ratios.max()),
            "resolved_quality": self.resolved_quality,
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "frame": np.arange(self.frame_bytes.size),
            "bytes": self.frame_bytes,
            "reference_bytes": self.reference_bytes,
            "ratio": self.ratios,
        })


def encode_sequence(
    seq: FrameSequence,
    spec: CompressionSpec,
    workers: Optional[int] = None,
) -> Tuple[List[bytes], SizeReport]:
    """
    Encode every frame on its own.

    A ratio-targeted JPEG spec is resolved to one quality on the first frame
    and that quality is used for the whole sequence.
    """
    quality = None
    if spec.format is CodecFormat.JPEG and spec.quality is None:
        quality = resolve_jpeg_quality(seq.frames[0], spec.ratio)
        logger.info(f"{spec}: resolved JPEG quality {quality}")

    with ThreadPoolExecutor(max_workers=workers or settings.workers) as pool:
        payloads = list(pool.map(lambda frame: encode_frame(frame, spec, quality), seq.frames))

    report = SizeReport(
        spec=spec,
        frame_bytes=np.array([len(p) for p in payloads], dtype=np.int64),
        reference_bytes=reference_size(seq.frames[0]),
        resolved_quality=quality,
    )
    return payloads, report


def decode_sequence(
    payloads: List[bytes],
    template: FrameSequence,
    spec: CompressionSpec,
    workers: Optional[int] = None,
) -> FrameSequence:
    """Decode payloads into a sequence carrying the template's metadata."""
    with ThreadPoolExecutor(max_workers=workers or settings.workers) as pool:
        frames = list(pool.map(decode_frame, payloads))
    stack = np.stack(frames)
    if stack.shape != template.frames.shape:
        raise CodecException(f"decoded stack {stack.shape} does not match original {template.frames.shape}")
    return template.with_frames(stack, provenance=Provenance.decompressed(spec.label), flags=frozenset())


def roundtrip_sequence(
    seq: FrameSequence,
    spec: CompressionSpec,
    workers: Optional[int] = None,
) -> Tuple[FrameSequence, SizeReport]:
    """Encode then decode every frame independently."""
    payloads, report = encode_sequence(seq, spec, workers)
    decoded = decode_sequence(payloads, seq, spec, workers)
    logger.info(
        f"Round trip {spec}: mean {report.mean_bytes / 1024:.2f} KB per frame, "
        f"ratio {report.mean_ratio:.2f}"
    )
    return decoded, report


@dataclass(frozen=True)
class HistogramShiftReport:
    """256-bin intensity histograms of two sequences and their distance."""

    original: np.ndarray
    decompressed: np.ndarray
    total_variation: float
    mean_shift: float

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "level": np.arange(256),
            "original": self.original,
            "decompressed": self.decompressed,
        })


def intensity_histogram(seq: FrameSequence) -> np.ndarray:
    return np.bincount(seq.frames.ravel(), minlength=256)


def histogram_shift_report(original: FrameSequence, decompressed: FrameSequence) -> HistogramShiftReport:
    """Compare the 256-level intensity histograms of two sequences."""
    if original.frames.shape != decompressed.frames.shape:
        raise CodecException(
            f"sequence shapes differ: {original.frames.shape} vs {decompressed.frames.shape}"
        )
    h_orig = intensity_histogram(original)
    h_dec = intensity_histogram(decompressed)
    p, q = h_orig / h_orig.sum(), h_dec / h_dec.sum()
    levels = np.arange(256)
    return HistogramShiftReport(
        original=h_orig,
        decompressed=h_dec,
        total_variation=float(0.5 * np.abs(p - q).sum()),
        mean_shift=float((levels * q).sum() - (levels * p).sum()),
    )


def mean_absolute_error(a: FrameSequence, b: FrameSequence) -> float:
    """Mean absolute pixel difference between two sequences."""
    if a.frames.shape != b.frames.shape:
        raise CodecException(f"sequence shapes differ: {a.frames.shape} vs {b.frames.shape}")
    return float(np.abs(a.frames.astype(np.int16) - b.frames.astype(np.int16)).mean())


def block_periodicity(frame: np.ndarray, period: int = 8) -> float:
    """
    Blocking strength of one gray frame.

    Power of the column-difference profile at the block frequency (and its
    harmonics) relative to the mean power of the other non-DC bins.
    """
    frame = np.asarray(frame, dtype=np.float64)
    profile = np.abs(np.diff(frame, axis=1)).mean(axis=0)
    length = (profile.size // period) * period
    if length < 2 * period:
        raise CodecException(f"frame too narrow for period {period}")
    power = np.abs(np.fft.rfft(profile[:length] - profile[:length].mean())) ** 2
    k = length // period
    harmonic = np.zeros(power.size, dtype=bool)
    harmonic[k::k] = True
    background = power[1:][~harmonic[1:]]
    return float(power[harmonic].mean() / max(background.mean(), 1e-12))
