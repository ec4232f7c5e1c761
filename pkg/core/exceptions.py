"""Custom exceptions for the application."""
from pathlib import Path
from typing import Optional, Union


class AppException(Exception):
    """Base application exception."""

    def __init__(self, message: str, code: str = "INTERNAL_ERROR"):
        self.message = message
        self.code = code
        super().__init__(self.message)


class ConfigurationException(AppException):
    """Invalid configuration or domain type."""

    def __init__(self, message: str):
        super().__init__(f"Invalid configuration: {message}", "CONFIG_ERROR")


class SynthesisException(AppException):
    """Error during speckle synthesis."""

    def __init__(self, message: str):
        super().__init__(f"Synthesis failed: {message}", "SYNTHESIS_ERROR")


class EstimatorException(AppException):
    """Error while computing an activity estimate."""

    def __init__(self, message: str):
        super().__init__(f"Estimator failed: {message}", "ESTIMATOR_ERROR")


class CodecException(AppException):
    """Error encoding or decoding a frame."""

    def __init__(self, message: str, detected_format: Optional[str] = None):
        self.detected_format = detected_format
        suffix = f" (detected format: {detected_format})" if detected_format else ""
        super().__init__(f"Codec error: {message}{suffix}", "CODEC_ERROR")


class MetricException(AppException):
    """Error while comparing maps."""

    def __init__(self, message: str):
        super().__init__(f"Metric failed: {message}", "METRIC_ERROR")


class StorageException(AppException):
    """Error in storage operations."""

    def __init__(self, message: str, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path is not None else None
        location = f" [{path}]" if path is not None else ""
        super().__init__(f"Storage error: {message}{location}", "STORAGE_ERROR")


class IngestException(AppException):
    """Error reading experimental frames."""

    def __init__(self, message: str, filename: Optional[Union[str, Path]] = None):
        self.filename = str(filename) if filename is not None else None
        location = f" [{filename}]" if filename is not None else ""
        super().__init__(f"Ingest failed: {message}{location}", "INGEST_ERROR")
