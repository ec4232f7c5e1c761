"""Map comparison and region statistics."""
from .ssim import SsiReport, SsimParams, ssi_map
from .statistics import (
    Histogram,
    Roi,
    activity_time_series,
    aligned_block_means,
    estimate_histogram,
    joint_histograms,
    region_contrast,
    roi_mean,
)

__all__ = [
    'SsiReport',
    'SsimParams',
    'ssi_map',
    'Histogram',
    'Roi',
    'activity_time_series',
    'aligned_block_means',
    'estimate_histogram',
    'joint_histograms',
    'region_contrast',
    'roi_mean',
]
