"""Configuration management using Pydantic Settings."""
from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings."""

    # Output
    output_dir: Path = Path("./runs")

    # Execution
    workers: int = 4
    frame_chunk: int = 16
    row_band: int = 64

    # Estimators
    default_lag: int = 10
    s2_stabilizer: float = 1.0
    degenerate_epsilon: float = 1e-12

    # Codecs
    jp2_ratio_tolerance: float = 0.15
    jp2_irreversible: bool = True
    jpeg_subsampling: Optional[int] = None  # None keeps the encoder default

    # Metrics
    ssim_window: int = 11
    ssim_k1: float = 0.01
    ssim_k2: float = 0.03
    histogram_bins: int = 128
    heatmap_colormap: str = "viridis"

    # Logging
    log_level: str = "INFO"
    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    model_config = SettingsConfigDict(
        env_prefix="DSM_",
        env_file=".env",
        env_file_encoding="utf-8",
    )


settings = Settings()
