"""Structure-function activity estimators.

Frames are processed in bands of rows so that large sequences never need a
full float copy; bands run on a thread pool and are stitched in row order.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import settings
from core.exceptions import EstimatorException
from core.frames import FrameSequence
from .types import ActivityMap, Estimator, PixelStats

logger = logging.getLogger(__name__)

SequenceLike = Union[FrameSequence, np.ndarray]


def intensity_stack(seq: SequenceLike) -> np.ndarray:
    """Raw (N, ny, nx) intensity array of a sequence or array."""
    if isinstance(seq, FrameSequence):
        if not seq.is_gray:
            raise EstimatorException("estimators need a single intensity channel; select one at ingestion")
        return seq.frames
    frames = np.asarray(seq)
    if frames.ndim != 3:
        raise EstimatorException(f"expected an (N, ny, nx) stack, got shape {frames.shape}")
    return frames


def check_lag(n_frames: int, m: int) -> None:
    if not 1 <= m <= n_frames - 1:
        raise EstimatorException(f"lag m={m} outside [1, {n_frames - 1}]")


def run_bands(
    frames: np.ndarray,
    fn: Callable[[np.ndarray], Tuple[np.ndarray, ...]],
    workers: Optional[int] = None,
) -> Tuple[np.ndarray, ...]:
    """Apply fn to float64 row bands of the stack and stitch each output."""
    ny = frames.shape[1]
    band = max(1, settings.row_band)
    bounds = [(start, min(ny, start + band)) for start in range(0, ny, band)]

    def run(bound):
        return fn(frames[:, bound[0]: bound[1]].astype(np.float64))

    with ThreadPoolExecutor(max_workers=workers or settings.workers) as pool:
        parts = list(pool.map(run, bounds))
    return tuple(np.concatenate(outputs, axis=0) for outputs in zip(*parts))


def _population_variance(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mean = x.sum(axis=0) / x.shape[0]
    d = x - mean
    return mean, (d * d).sum(axis=0) / x.shape[0]


def pixel_stats(seq: SequenceLike) -> PixelStats:
    """Per-pixel mean and population variance (divisor N)."""
    frames = intensity_stack(seq)
    if frames.shape[0] < 2:
        raise EstimatorException("pixel statistics need at least 2 frames")
    mean, variance = run_bands(frames, _population_variance)
    return PixelStats(mean=mean, variance=variance)


def msf_s1(seq: SequenceLike, m: int) -> ActivityMap:
    """Mean absolute intensity difference at lag m over N - m terms."""
    frames = intensity_stack(seq)
    check_lag(frames.shape[0], m)

    def band(x):
        return (np.abs(x[m:] - x[:-m]).sum(axis=0) / (x.shape[0] - m),)

    (values,) = run_bands(frames, band)
    return ActivityMap(values, Estimator.S1, m, np.ones(values.shape, dtype=bool))


def msf_s2(seq: SequenceLike, m: int, q: Optional[float] = None) -> ActivityMap:
    """
    Mean of |I_i - I_{i+m}| / (I_i + I_{i+m} + q) at lag m.

    A 0/0 term (only possible with q = 0) counts as 0 and marks the pixel invalid.
    """
    q = settings.s2_stabilizer if q is None else float(q)
    if q < 0:
        raise EstimatorException(f"stabilizer q must be non-negative, got {q}")
    frames = intensity_stack(seq)
    check_lag(frames.shape[0], m)

    def band(x):
        a, b = x[:-m], x[m:]
        den = a + b + q
        terms = np.divide(np.abs(a - b), den, out=np.zeros_like(den), where=den > 0)
        return terms.sum(axis=0) / (x.shape[0] - m), np.all(den > 0, axis=0)

    values, valid = run_bands(frames, band)
    if not valid.all():
        logger.warning(f"S2: {int((~valid).sum())} pixels hit a 0/0 term")
    return ActivityMap(values, Estimator.S2, m, valid, q=q)


def msf_s1_norm(seq: SequenceLike, m: int) -> ActivityMap:
    """Structure function divided by the per-pixel standard deviation."""
    frames = intensity_stack(seq)
    check_lag(frames.shape[0], m)
    eps = settings.degenerate_epsilon

    def band(x):
        s1 = np.abs(x[m:] - x[:-m]).sum(axis=0) / (x.shape[0] - m)
        _, variance = _population_variance(x)
        sigma = np.sqrt(variance)
        valid = sigma >= eps
        values = np.divide(s1, sigma, out=np.zeros_like(s1), where=valid)
        return values, valid

    values, valid = run_bands(frames, band)
    if not valid.all():
        logger.warning(f"S1_NORM: {int((~valid).sum())} pixels have degenerate variance")
    return ActivityMap(values, Estimator.S1_NORM, m, valid)


def compute_map(seq: SequenceLike, estimator: Estimator, m: int, q: Optional[float] = None) -> ActivityMap:
    """Dispatch to the estimator by name."""
    if estimator is Estimator.S1:
        return msf_s1(seq, m)
    if estimator is Estimator.S2:
        return msf_s2(seq, m, q)
    if estimator is Estimator.S1_NORM:
        return msf_s1_norm(seq, m)
    raise EstimatorException(f"unsupported estimator {estimator}")


def shared_display_range(maps: Sequence[ActivityMap]) -> Optional[Tuple[float, float]]:
    """Joint [min, max] of the valid values of all maps."""
    ranges = [amap.value_range() for amap in maps if amap.valid_mask.any()]
    if not ranges:
        return None
    return min(lo for lo, _ in ranges), max(hi for _, hi in ranges)


def map_set(
    seqs: Sequence[SequenceLike],
    estimator: Estimator,
    m: int,
    q: Optional[float] = None,
) -> List[ActivityMap]:
    """
    One activity map per sequence, all carrying the same display range.

    Raises:
        EstimatorException: If the sequences differ in frame size
    """
    if not seqs:
        return []
    shapes = {intensity_stack(seq).shape[1:] for seq in seqs}
    if len(shapes) > 1:
        raise EstimatorException(f"sequences differ in frame size: {sorted(shapes)}")

    maps = [compute_map(seq, estimator, m, q) for seq in seqs]
    display_range = shared_display_range(maps)
    if display_range is None:
        return maps
    return [amap.with_display_range(display_range) for amap in maps]
