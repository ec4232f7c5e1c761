"""Temporally correlated speckle sequences from a spatial activity field."""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Union

import numpy as np

from config import settings
from core.exceptions import SynthesisException
from core.frames import DEGENERATE_RANGE, FrameSequence, Provenance, ProvenanceKind
from core.rng import INITIAL_PHASE_STREAM, CounterRng
from .fields import PhaseField, SynthesisConfig, TauField
from .optics import bin_intensity, propagate_4f, surface_amplitude

logger = logging.getLogger(__name__)

QUANTIZATION_PERCENTILES = (0.1, 99.9)


def gen_initial_phase(config: SynthesisConfig, rng: Optional[CounterRng] = None) -> PhaseField:
    """Delta-correlated phase, uniform on [0, 2*pi), on the object grid."""
    rng = rng or CounterRng(config.seed)
    rows, cols = 2 * config.ny, 2 * config.nx
    values = rng.uniforms(INITIAL_PHASE_STREAM, rows * cols).reshape(rows, cols) * (2.0 * np.pi)
    return PhaseField(values, frame_index=0)


def evolve_phase(
    prev: PhaseField,
    tau: Union[TauField, np.ndarray],
    dt: float,
    rng: CounterRng,
) -> PhaseField:
    """
    Advance the phase by one frame.

    Each point receives sqrt(dt / tau_c) * N(0, 1), drawn from the stream of
    the new frame index in row-major order.

    Args:
        prev: Phase of the previous frame
        tau: Correlation radius field (camera grid) or its object-grid upsampling
        dt: Time step in units of the frame interval
        rng: Counter-based generator of the sequence

    Returns:
        Phase of frame prev.frame_index + 1
    """
    tau_grid = tau.upsampled() if isinstance(tau, TauField) else np.asarray(tau, dtype=np.float64)
    if tau_grid.shape != prev.values.shape:
        raise SynthesisException(
            f"tau grid {tau_grid.shape} does not match phase grid {prev.values.shape}"
        )
    index = prev.frame_index + 1
    draws = rng.normals(index, prev.values.size).reshape(prev.values.shape)
    return PhaseField(prev.values + np.sqrt(dt / tau_grid) * draws, frame_index=index)


def camera_frame(phase: PhaseField, config: SynthesisConfig) -> np.ndarray:
    """Float camera intensity for one phase state."""
    field = surface_amplitude(phase, config.illumination)
    return bin_intensity(propagate_4f(field, config.optics))


def quantize_sequence(stack: np.ndarray, dt: float = 1.0, pixel_pitch: float = 1.0) -> FrameSequence:
    """
    Map a float intensity stack to 8 bits with one global linear stretch.

    The 0.1% and 99.9% percentiles of the whole stack go to 0 and 255; values
    are clamped and rounded half-up. A constant stack gives all zeros and the
    `degenerate_range` flag.
    """
    stack = np.asarray(stack, dtype=np.float64)
    if stack.ndim == 2:
        stack = stack[None]
    if stack.ndim != 3 or stack.shape[0] < 1:
        raise SynthesisException(f"expected a stack of 2D frames, got shape {stack.shape}")

    p_lo, p_hi = np.percentile(stack, QUANTIZATION_PERCENTILES)
    provenance = Provenance(ProvenanceKind.SYNTHETIC)
    if not p_hi > p_lo:
        logger.warning("Quantization range is degenerate (constant stack), emitting zeros")
        return FrameSequence(
            np.zeros(stack.shape, dtype=np.uint8),
            dt=dt,
            pixel_pitch=pixel_pitch,
            provenance=provenance,
            flags=frozenset({DEGENERATE_RANGE}),
        )

    scaled = (stack - p_lo) / (p_hi - p_lo) * 255.0
    levels = np.floor(np.clip(scaled, 0.0, 255.0) + 0.5).astype(np.uint8)
    return FrameSequence(levels, dt=dt, pixel_pitch=pixel_pitch, provenance=provenance)


def synthesize_intensity(config: SynthesisConfig, workers: Optional[int] = None) -> np.ndarray:
    """
    Float camera intensities of all frames, before quantization.

    Phases are advanced serially; 4f propagation of a batch of phase states
    runs on a thread pool. The result does not depend on the worker count.

    Returns:
        Array of shape (n_frames, ny, nx)
    """
    workers = workers or settings.workers
    chunk = max(1, settings.frame_chunk)
    rng = CounterRng(config.seed)
    tau_grid = config.tau_field.upsampled()

    stack = np.empty((config.n_frames, config.ny, config.nx), dtype=np.float64)
    phase = gen_initial_phase(config, rng)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for start in range(0, config.n_frames, chunk):
            stop = min(config.n_frames, start + chunk)
            batch = []
            for i in range(start, stop):
                if i > 0:
                    phase = evolve_phase(phase, tau_grid, 1.0, rng)
                batch.append(phase)
            for i, frame in zip(range(start, stop), pool.map(lambda p: camera_frame(p, config), batch)):
                stack[i] = frame
            logger.debug(f"Synthesized frames {start}..{stop - 1}")

    return stack


def synthesize(config: SynthesisConfig, workers: Optional[int] = None) -> FrameSequence:
    """Run phase generation, imaging, binning and quantization for all frames."""
    try:
        logger.info(
            f"Synthesizing {config.n_frames} frames of {config.nx}x{config.ny} "
            f"(seed={config.seed}, cutoff={config.optics.cutoff}, illumination={config.illumination.kind})"
        )
        stack = synthesize_intensity(config, workers)
        sequence = quantize_sequence(stack, dt=config.dt, pixel_pitch=config.pixel_pitch)
        logger.info(f"✓ Synthesized {sequence.n_frames} frames")
        return sequence

    except SynthesisException:
        raise

    except Exception as e:
        logger.error(f"Synthesis error: {e}")
        raise SynthesisException(str(e))
