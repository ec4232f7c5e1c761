"""Object surface field, 4f imaging and camera pixel integration."""
from functools import lru_cache

import numpy as np

from core.exceptions import SynthesisException
from .fields import IlluminationProfile, OpticalSystem, PhaseField


def surface_amplitude(phase: PhaseField, illum: IlluminationProfile) -> np.ndarray:
    """
    Complex amplitude on the object surface, sqrt(I0) * exp(-j*phi).

    Args:
        phase: Phase on the object grid
        illum: Beam profile

    Returns:
        Complex array with the shape of the phase grid
    """
    ny, nx = phase.camera_shape
    i0 = illum.intensity(nx, ny)
    return np.sqrt(i0) * np.exp(-1j * phase.values)


@lru_cache(maxsize=16)
def circ_mask(shape: tuple, cutoff: float) -> np.ndarray:
    """Binary pupil in unshifted FFT layout; radius in cycles per sample."""
    fy = np.fft.fftfreq(shape[0])
    fx = np.fft.fftfreq(shape[1])
    mask = (fy[:, None] ** 2 + fx[None, :] ** 2) <= cutoff ** 2
    mask.setflags(write=False)
    return mask


def propagate_4f(field: np.ndarray, optics: OpticalSystem) -> np.ndarray:
    """Field on the sensor: inverse FFT of the pupil-masked spectrum."""
    if field.ndim != 2 or field.shape[0] % 2 or field.shape[1] % 2:
        raise SynthesisException(f"4f propagation needs an even 2D grid, got {field.shape}")
    spectrum = np.fft.fft2(field)
    spectrum *= circ_mask(tuple(field.shape), float(optics.cutoff))
    return np.fft.ifft2(spectrum)


def bin_intensity(field: np.ndarray) -> np.ndarray:
    """
    Integrate |U|^2 over non-overlapping 2x2 blocks (one camera pixel each).

    Raises:
        SynthesisException: If a grid dimension is odd
    """
    rows, cols = field.shape
    if rows % 2 or cols % 2:
        raise SynthesisException(f"object grid must have even dimensions, got {field.shape}")
    intensity = np.abs(field) ** 2
    return intensity.reshape(rows // 2, 2, cols // 2, 2).sum(axis=(1, 3))


def speckle_contrast(frame: np.ndarray) -> float:
    """Speckle contrast sigma(I)/mean(I) over a frame."""
    values = np.asarray(frame, dtype=np.float64)
    mean = values.mean()
    if mean <= 0:
        return 0.0
    return float(values.std() / mean)


def speckle_size(intensity: np.ndarray) -> float:
    """
    Speckle size as the full width at half maximum of the normalized
    intensity autocovariance along the row axis, in samples.
    """
    values = np.asarray(intensity, dtype=np.float64)
    centered = values - values.mean()
    power = np.abs(np.fft.fft2(centered)) ** 2
    acov = np.real(np.fft.ifft2(power))
    if acov[0, 0] <= 0:
        return 0.0
    profile = acov[0, : values.shape[1] // 2] / acov[0, 0]
    below = np.nonzero(profile < 0.5)[0]
    if below.size == 0:
        return float(values.shape[1])
    k = int(below[0])
    # linear interpolation between the last sample above and the first below half maximum
    r_half = (k - 1) + (profile[k - 1] - 0.5) / (profile[k - 1] - profile[k])
    return float(2.0 * r_half)
