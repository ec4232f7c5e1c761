"""Activity maps and temporal statistics."""
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from core.exceptions import EstimatorException


class Estimator(str, Enum):
    """Pointwise activity estimators."""

    S1 = "S1"            # modified structure function
    S2 = "S2"            # normalized differences with stabilizer q
    S1_NORM = "S1_NORM"  # structure function over the per-pixel std

    @classmethod
    def parse(cls, name: str) -> "Estimator":
        key = name.strip().upper().replace("'", "_NORM").replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise EstimatorException(
                f"unknown estimator '{name}', expected one of {[e.value for e in cls]}"
            )


@dataclass(frozen=True)
class ActivityMap:
    """Per-pixel activity estimate at lag m."""

    values: np.ndarray
    estimator: Estimator
    lag_m: int
    valid_mask: np.ndarray
    q: Optional[float] = None
    display_range: Optional[Tuple[float, float]] = None

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def valid_values(self) -> np.ndarray:
        return self.values[self.valid_mask]

    def mean(self) -> float:
        """Spatial mean over valid pixels."""
        valid = self.valid_values()
        if valid.size == 0:
            raise EstimatorException("map has no valid pixels")
        return float(valid.mean())

    def value_range(self) -> Tuple[float, float]:
        valid = self.valid_values()
        if valid.size == 0:
            raise EstimatorException("map has no valid pixels")
        return float(valid.min()), float(valid.max())

    def with_display_range(self, display_range: Tuple[float, float]) -> "ActivityMap":
        return replace(self, display_range=(float(display_range[0]), float(display_range[1])))

    def scaled(self, factor: float) -> "ActivityMap":
        return replace(self, values=self.values * factor)

    def describe(self) -> str:
        label = self.estimator.value
        if self.estimator is Estimator.S2:
            label += f"(q={self.q:g})"
        return f"{label}, m={self.lag_m}"


@dataclass(frozen=True)
class PixelStats:
    """Population mean and variance of every pixel's time series."""

    mean: np.ndarray
    variance: np.ndarray


@dataclass(frozen=True)
class CorrelationCurve:
    """Spatially averaged normalized temporal autocovariance for lags 0..n_tau."""

    rho: np.ndarray
    n_tau: int
    valid_pixels: int

    @property
    def lags(self) -> np.ndarray:
        return np.arange(self.n_tau + 1)

    def max_deviation(self, other: "CorrelationCurve") -> float:
        n = min(self.n_tau, other.n_tau) + 1
        return float(np.max(np.abs(self.rho[:n] - other.rho[:n])))
