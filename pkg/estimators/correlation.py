"""Mean normalized temporal correlation of intensity fluctuations."""
import logging

import numpy as np

from config import settings
from core.exceptions import EstimatorException
from .msf import SequenceLike, intensity_stack, run_bands
from .types import CorrelationCurve

logger = logging.getLogger(__name__)


def temporal_corr(seq: SequenceLike, n_tau: int) -> CorrelationCurve:
    """
    Spatial average of each pixel's autocovariance at lags 0..n_tau divided
    by its population variance.

    Pixels whose variance is below the degeneracy threshold are left out of
    the average.

    Raises:
        EstimatorException: If n_tau is out of range or every pixel is degenerate
    """
    frames = intensity_stack(seq)
    n = frames.shape[0]
    if not 0 <= n_tau <= n - 1:
        raise EstimatorException(f"n_tau={n_tau} outside [0, {n - 1}]")
    eps = settings.degenerate_epsilon

    def band(x):
        d = x - x.sum(axis=0) / n
        variance = (d * d).sum(axis=0) / n
        valid = variance >= eps
        sums = np.empty(n_tau + 1)
        for m in range(n_tau + 1):
            cov = (d[: n - m] * d[m:]).sum(axis=0) / (n - m)
            sums[m] = (cov[valid] / variance[valid]).sum()
        return sums[None, :], np.array([[valid.sum()]])

    band_sums, band_counts = run_bands(frames, band)
    count = int(band_counts.sum())
    if count == 0:
        raise EstimatorException("every pixel has degenerate variance")
    skipped = frames.shape[1] * frames.shape[2] - count
    if skipped:
        logger.warning(f"Correlation: {skipped} degenerate pixels excluded")

    rho = band_sums.sum(axis=0) / count
    return CorrelationCurve(rho=rho, n_tau=n_tau, valid_pixels=count)
