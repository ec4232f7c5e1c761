"""Core module with shared components."""
from .exceptions import (
    AppException,
    ConfigurationException,
    SynthesisException,
    EstimatorException,
    CodecException,
    MetricException,
    StorageException,
    IngestException,
)
from .frames import Channels, FrameSequence, Provenance, ProvenanceKind, DEGENERATE_RANGE
from .rng import CounterRng, INITIAL_PHASE_STREAM

__all__ = [
    'AppException',
    'ConfigurationException',
    'SynthesisException',
    'EstimatorException',
    'CodecException',
    'MetricException',
    'StorageException',
    'IngestException',
    'Channels',
    'FrameSequence',
    'Provenance',
    'ProvenanceKind',
    'DEGENERATE_RANGE',
    'CounterRng',
    'INITIAL_PHASE_STREAM',
]
