"""Estimate histograms and region statistics of activity maps."""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import settings
from core.exceptions import ConfigurationException, MetricException
from estimators.types import ActivityMap

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Histogram:
    """Counts over uniform bins plus the sample mean and std of the binned values."""

    counts: np.ndarray
    edges: np.ndarray
    mean: float
    std: float

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def density(self) -> np.ndarray:
        widths = np.diff(self.edges)
        return self.counts / (self.total * widths)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "bin_lo": self.edges[:-1],
            "bin_hi": self.edges[1:],
            "count": self.counts,
        })


def estimate_histogram(
    activity: ActivityMap,
    n_bins: Optional[int] = None,
    value_range: Optional[Tuple[float, float]] = None,
) -> Histogram:
    """
    Histogram of the valid map values.

    Bins span [min, max] of the valid values unless value_range is given;
    values outside an explicit range are counted in the edge bins so that
    the counts always sum to the number of valid pixels.

    Raises:
        MetricException: If the map has no valid pixels
    """
    n_bins = n_bins or settings.histogram_bins
    if n_bins < 1:
        raise ConfigurationException(f"n_bins must be positive, got {n_bins}")
    values = activity.valid_values()
    if values.size == 0:
        raise MetricException("map has no valid pixels")

    lo, hi = value_range if value_range is not None else (float(values.min()), float(values.max()))
    if hi < lo:
        raise ConfigurationException(f"histogram range is reversed: ({lo}, {hi})")
    counts, edges = np.histogram(np.clip(values, lo, hi), bins=n_bins, range=(lo, hi))
    return Histogram(counts=counts, edges=edges, mean=float(values.mean()), std=float(values.std()))


def joint_histograms(maps: Sequence[ActivityMap], n_bins: Optional[int] = None) -> List[Histogram]:
    """Histograms of several maps over the joint valid range, so bin edges are shared."""
    if not maps:
        return []
    valid = [m.valid_values() for m in maps]
    if any(v.size == 0 for v in valid):
        raise MetricException("map has no valid pixels")
    lo = min(float(v.min()) for v in valid)
    hi = max(float(v.max()) for v in valid)
    return [estimate_histogram(m, n_bins, (lo, hi)) for m in maps]


@dataclass(frozen=True)
class Roi:
    """Rectangle (x0, y0, width, height) in pixels."""

    x0: int
    y0: int
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigurationException(f"roi needs positive size, got {self.width}x{self.height}")
        if self.x0 < 0 or self.y0 < 0:
            raise ConfigurationException(f"roi origin must be non-negative, got ({self.x0}, {self.y0})")

    @classmethod
    def centered(cls, shape: Tuple[int, int], width: int, height: Optional[int] = None) -> "Roi":
        """Roi of the given size around the center of a (ny, nx) map."""
        height = height or width
        ny, nx = shape
        return cls(max(0, (nx - width) // 2), max(0, (ny - height) // 2), width, height)

    @classmethod
    def parse(cls, text: str) -> "Roi":
        """Parse ``x0,y0,width,height``."""
        try:
            x0, y0, width, height = (int(p) for p in text.split(","))
        except ValueError:
            raise ConfigurationException(f"roi must be 'x0,y0,width,height', got '{text}'")
        return cls(x0, y0, width, height)

    def check_within(self, shape: Tuple[int, int]) -> None:
        ny, nx = shape
        if self.x0 + self.width > nx or self.y0 + self.height > ny:
            raise MetricException(f"roi {self} exceeds map bounds {nx}x{ny}")

    @property
    def slices(self) -> Tuple[slice, slice]:
        return slice(self.y0, self.y0 + self.height), slice(self.x0, self.x0 + self.width)

    def __str__(self) -> str:
        return f"{self.x0},{self.y0},{self.width},{self.height}"


def roi_mean(activity: ActivityMap, roi: Roi) -> float:
    """Mean over the valid pixels inside roi."""
    roi.check_within(activity.shape)
    rows, cols = roi.slices
    values = activity.values[rows, cols][activity.valid_mask[rows, cols]]
    if values.size == 0:
        raise MetricException(f"roi {roi} holds no valid pixels")
    return float(values.mean())


def activity_time_series(maps: Sequence[ActivityMap], roi: Roi) -> pd.Series:
    """roi_mean of each map, indexed by set position."""
    if not maps:
        return pd.Series([], dtype=np.float64, name="roi_mean", index=pd.RangeIndex(0, name="set"))
    shapes = {m.shape for m in maps}
    if len(shapes) > 1:
        raise MetricException(f"maps have different dims: {sorted(shapes)}")
    values = [roi_mean(m, roi) for m in maps]
    return pd.Series(values, name="roi_mean", index=pd.RangeIndex(len(values), name="set"))


def _region_values(activity: ActivityMap, mask: np.ndarray, name: str) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != activity.shape:
        raise MetricException(f"mask {name} has shape {mask.shape}, map has {activity.shape}")
    values = activity.values[mask & activity.valid_mask]
    if values.size == 0:
        raise MetricException(f"mask {name} holds no valid pixels")
    return values


def region_contrast(activity: ActivityMap, mask_a: np.ndarray, mask_b: np.ndarray) -> float:
    """
    Ratio of the mean map value over mask_a to that over mask_b.

    Raises:
        MetricException: For overlapping or empty masks, or a zero denominator
    """
    if np.any(np.asarray(mask_a, dtype=bool) & np.asarray(mask_b, dtype=bool)):
        raise MetricException("region masks overlap")
    mean_a = float(_region_values(activity, mask_a, "A").mean())
    mean_b = float(_region_values(activity, mask_b, "B").mean())
    if mean_b == 0.0:
        raise MetricException("mean over region B is zero")
    return mean_a / mean_b


def aligned_block_means(activity: ActivityMap, mask: np.ndarray, block: int = 8) -> np.ndarray:
    """
    Means of the block x block tiles aligned to the pixel grid origin.

    Only tiles lying entirely inside mask get a value; the rest are NaN.
    Result shape is (ny // block, nx // block).
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != activity.shape:
        raise MetricException(f"mask has shape {mask.shape}, map has {activity.shape}")
    ny, nx = activity.shape
    by, bx = ny // block, nx // block
    if by == 0 or bx == 0:
        raise MetricException(f"map {nx}x{ny} is smaller than one {block}x{block} block")

    def tiles(a: np.ndarray) -> np.ndarray:
        return a[: by * block, : bx * block].reshape(by, block, bx, block).swapaxes(1, 2).reshape(by, bx, -1)

    keep = tiles(mask & activity.valid_mask)
    values = tiles(np.where(activity.valid_mask, activity.values, 0.0))
    inside = tiles(mask).all(axis=-1)
    counts = keep.sum(axis=-1)
    sums = np.where(keep, values, 0.0).sum(axis=-1)
    means = np.full((by, bx), np.nan)
    ok = inside & (counts > 0)
    means[ok] = sums[ok] / counts[ok]
    return means
