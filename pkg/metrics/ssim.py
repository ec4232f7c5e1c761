"""Structural similarity between activity maps."""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.ndimage import uniform_filter

from config import settings
from core.exceptions import MetricException
from estimators.types import ActivityMap

logger = logging.getLogger(__name__)

MapLike = Union[ActivityMap, np.ndarray]


class SsimParams(BaseModel):
    """
    Local-statistics SSIM settings.

    The stabilizing constants are c1 = (k1*L)^2 and c2 = (k2*L)^2 where L is
    `data_range`, or the joint valid range of the two maps when unset.
    """

    model_config = ConfigDict(frozen=True)

    window: int = Field(default_factory=lambda: settings.ssim_window)
    k1: float = Field(default_factory=lambda: settings.ssim_k1, gt=0)
    k2: float = Field(default_factory=lambda: settings.ssim_k2, gt=0)
    data_range: Optional[float] = Field(default=None, ge=0)

    @field_validator("window")
    @classmethod
    def _odd_window(cls, value: int) -> int:
        if value < 3 or value % 2 == 0:
            raise ValueError(f"window must be odd and >= 3, got {value}")
        return value

    def constants(self, data_range: float) -> Tuple[float, float]:
        return (self.k1 * data_range) ** 2, (self.k2 * data_range) ** 2


@dataclass(frozen=True)
class SsiReport:
    """Per-pixel SSI map and its mean over valid pixels."""

    ssi_map: np.ndarray
    mean_ssi: float
    valid_mask: np.ndarray
    params: SsimParams
    data_range: float

    def summary(self) -> dict:
        return {
            "mean_ssi": self.mean_ssi,
            "window": self.params.window,
            "k1": self.params.k1,
            "k2": self.params.k2,
            "data_range": self.data_range,
            "valid_pixels": int(self.valid_mask.sum()),
        }


def _unpack(m: MapLike) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(m, ActivityMap):
        return np.asarray(m.values, dtype=np.float64), np.asarray(m.valid_mask, dtype=bool)
    values = np.asarray(m, dtype=np.float64)
    return values, np.isfinite(values)


def ssi_map(map_a: MapLike, map_b: MapLike, params: Optional[SsimParams] = None) -> SsiReport:
    """
    Structural similarity of two activity maps over square sliding windows.

    Window statistics use only pixels valid in both maps; at the borders the
    window shrinks to the part inside the map. Variances are population
    variances.

    Args:
        map_a: First map
        map_b: Second map, same dims
        params: Window and constants; defaults come from settings

    Returns:
        SsiReport with values clipped to [-1, 1]

    Raises:
        MetricException: On dimension mismatch, non-finite valid values, or a
            zero dynamic range with differing maps
    """
    params = params or SsimParams()
    a, valid_a = _unpack(map_a)
    b, valid_b = _unpack(map_b)
    if a.shape != b.shape or a.ndim != 2:
        raise MetricException(f"map dimensions differ: {a.shape} vs {b.shape}")

    valid = valid_a & valid_b
    if not valid.any():
        raise MetricException("maps share no valid pixels")
    if not (np.isfinite(a[valid]).all() and np.isfinite(b[valid]).all()):
        raise MetricException("maps contain non-finite values at valid pixels")

    if params.data_range is not None:
        data_range = float(params.data_range)
    else:
        joint = np.concatenate([a[valid], b[valid]])
        data_range = float(joint.max() - joint.min())

    if data_range == 0.0:
        if np.array_equal(a[valid], b[valid]):
            ones = np.where(valid, 1.0, np.nan)
            return SsiReport(ones, 1.0, valid, params, data_range)
        raise MetricException("dynamic range is zero but the maps differ")

    c1, c2 = params.constants(data_range)
    weight = valid.astype(np.float64)
    x = np.where(valid, a, 0.0)
    y = np.where(valid, b, 0.0)

    def window_sum(img: np.ndarray) -> np.ndarray:
        return uniform_filter(img, size=params.window, mode="constant", cval=0.0)

    w = window_sum(weight)
    covered = valid & (w > 0.5 / params.window ** 2)
    w = np.where(covered, w, 1.0)

    mx = window_sum(x) / w
    my = window_sum(y) / w
    vx = window_sum(x * x) / w - mx * mx
    vy = window_sum(y * y) / w - my * my
    cxy = window_sum(x * y) / w - mx * my

    num = (2.0 * (mx * my) + c1) * (2.0 * cxy + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    ssi = np.clip(num / den, -1.0, 1.0)
    ssi = np.where(covered, ssi, np.nan)

    mean_ssi = float(ssi[covered].mean())
    logger.debug(f"SSI over {int(covered.sum())} pixels, L={data_range:.4g}: mean {mean_ssi:.4f}")
    return SsiReport(ssi, mean_ssi, covered, params, data_range)
