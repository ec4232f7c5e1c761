"""Synthetic dynamic speckle generation."""
from .fields import (
    CONTRAST_PRESETS,
    IlluminationProfile,
    OpticalSystem,
    PhaseField,
    SynthesisConfig,
    TauField,
)
from .generator import (
    camera_frame,
    evolve_phase,
    gen_initial_phase,
    quantize_sequence,
    synthesize,
    synthesize_intensity,
)
from .optics import bin_intensity, propagate_4f, speckle_contrast, speckle_size, surface_amplitude

__all__ = [
    'CONTRAST_PRESETS',
    'IlluminationProfile',
    'OpticalSystem',
    'PhaseField',
    'SynthesisConfig',
    'TauField',
    'camera_frame',
    'evolve_phase',
    'gen_initial_phase',
    'quantize_sequence',
    'synthesize',
    'synthesize_intensity',
    'bin_intensity',
    'propagate_4f',
    'speckle_contrast',
    'speckle_size',
    'surface_amplitude',
]
