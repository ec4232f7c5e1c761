"""Pointwise activity estimators."""
from .correlation import temporal_corr
from .msf import (
    compute_map,
    map_set,
    msf_s1,
    msf_s1_norm,
    msf_s2,
    pixel_stats,
    shared_display_range,
)
from .types import ActivityMap, CorrelationCurve, Estimator, PixelStats

__all__ = [
    'temporal_corr',
    'compute_map',
    'map_set',
    'msf_s1',
    'msf_s1_norm',
    'msf_s2',
    'pixel_stats',
    'shared_display_range',
    'ActivityMap',
    'CorrelationCurve',
    'Estimator',
    'PixelStats',
]
