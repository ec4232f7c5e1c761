"""Services orchestrating synthesis, compression, analysis and ingestion."""
from .analysis_service import AnalysisService
from .compression_service import CompressionService
from .ingest_service import IngestService
from .simulation_service import SimulationService
from .timeseries_service import TimeSeriesService

__all__ = [
    'AnalysisService',
    'CompressionService',
    'IngestService',
    'SimulationService',
    'TimeSeriesService',
]
