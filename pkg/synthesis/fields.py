"""Domain types of the speckle synthesis: object-grid fields and optics."""
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.exceptions import ConfigurationException

# Circ-filter radii (fraction of the object-grid sampling frequency)
CONTRAST_PRESETS = {
    "high_contrast": 0.08,
    "low_contrast": 0.50,
}


@dataclass(frozen=True)
class PhaseField:
    """Phase on the object grid, sampled at half the camera pitch."""

    values: np.ndarray
    frame_index: int = 0

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] % 2 or self.values.shape[1] % 2:
            raise ConfigurationException(
                f"phase grid must be 2D with even dimensions, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ConfigurationException("phase values must be finite")

    @property
    def camera_shape(self) -> tuple:
        """Camera frame size (ny, nx) this grid bins down to."""
        return self.values.shape[0] // 2, self.values.shape[1] // 2


@dataclass(frozen=True)
class TauField:
    """Per-pixel temporal correlation radius, in units of the frame interval."""

    tau_c: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.tau_c, dtype=np.float64)
        if tau.ndim != 2:
            raise ConfigurationException(f"tau field must be 2D, got shape {tau.shape}")
        if not np.all(np.isfinite(tau)) or np.any(tau <= 0):
            raise ConfigurationException("tau field entries must be positive and finite")
        object.__setattr__(self, "tau_c", tau)

    @classmethod
    def constant(cls, nx: int, ny: int, tau: float) -> "TauField":
        return cls(np.full((ny, nx), float(tau)))

    @property
    def shape(self) -> tuple:
        return self.tau_c.shape

    def upsampled(self) -> np.ndarray:
        """Nearest-neighbour copy of the field on the object grid (2x per axis)."""
        return np.repeat(np.repeat(self.tau_c, 2, axis=0), 2, axis=1)

    def scaled(self, factor: float) -> "TauField":
        return TauField(self.tau_c * float(factor))


class IlluminationProfile(BaseModel):
    """Laser beam profile on the object surface."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["uniform", "gaussian"] = "uniform"
    omega: Optional[float] = Field(default=None, description="Beam spread in camera pixels")

    @model_validator(mode="after")
    def _check_omega(self) -> "IlluminationProfile":
        if self.kind == "gaussian" and (self.omega is None or self.omega <= 0):
            raise ValueError("gaussian illumination needs omega > 0")
        return self

    def intensity(self, nx: int, ny: int) -> np.ndarray:
        """
        Evaluate I0 on the object grid of a camera with nx x ny pixels.

        Object-grid point k sits at (k/2 - nx/2) camera pixels from the beam
        centre, so the centre point is exactly on axis.

        Returns:
            Array of shape (2*ny, 2*nx)
        """
        if self.kind == "uniform":
            return np.ones((2 * ny, 2 * nx))
        x = np.arange(2 * nx) / 2.0 - nx / 2.0
        y = np.arange(2 * ny) / 2.0 - ny / 2.0
        r2 = y[:, None] ** 2 + x[None, :] ** 2
        return np.exp(-r2 / self.omega ** 2)


class OpticalSystem(BaseModel):
    """Diffraction-limited 4f imaging with a binary circular pupil."""

    model_config = ConfigDict(frozen=True)

    cutoff: float = Field(default=CONTRAST_PRESETS["high_contrast"], gt=0.0, le=0.5)
    wavelength_nm: float = 532.0

    @classmethod
    def preset(cls, name: str, wavelength_nm: float = 532.0) -> "OpticalSystem":
        if name not in CONTRAST_PRESETS:
            raise ConfigurationException(
                f"unknown contrast preset '{name}', expected one of {sorted(CONTRAST_PRESETS)}"
            )
        return cls(cutoff=CONTRAST_PRESETS[name], wavelength_nm=wavelength_nm)


class SynthesisConfig(BaseModel):
    """Everything needed to reproduce one synthetic sequence bit for bit."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    nx: int = Field(ge=8)
    ny: int = Field(ge=8)
    n_frames: int = Field(ge=2)
    dt: float = Field(default=1.0, gt=0.0)
    pixel_pitch: float = Field(default=1.0, gt=0.0)
    tau_field: TauField
    illumination: IlluminationProfile = IlluminationProfile()
    optics: OpticalSystem = OpticalSystem()
    seed: int = Field(default=0, ge=0, lt=2 ** 64)

    @model_validator(mode="after")
    def _check_tau_shape(self) -> "SynthesisConfig":
        if self.tau_field.shape != (self.ny, self.nx):
            raise ValueError(
                f"tau field shape {self.tau_field.shape} does not match camera ({self.ny}, {self.nx})"
            )
        return self
