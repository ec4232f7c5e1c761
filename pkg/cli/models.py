"""Pydantic models for scenario and ingest files."""
import hashlib
import json
import logging
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, field_validator, model_validator

from compression.spec import CodecFormat, CompressionSpec
from core.exceptions import AppException, ConfigurationException
from estimators.types import Estimator
from synthesis.fields import CONTRAST_PRESETS, IlluminationProfile, OpticalSystem, SynthesisConfig, TauField
from synthesis.layouts import compose_tau, disk_mask, load_mask, text_mask

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


PositiveTau = Annotated[float, Field(gt=0)]
# One correlation radius, or one per activity set
TauSchedule = Union[PositiveTau, Annotated[List[PositiveTau], Field(min_length=1)]]


def tau_at(value: TauSchedule, set_index: int) -> float:
    return value[set_index] if isinstance(value, list) else value


def schedule_length(values: List[TauSchedule]) -> Optional[int]:
    """
    Common length of the per-set schedules among values, None if all are scalars.

    Raises:
        ValueError: If two schedules differ in length
    """
    lengths = {len(v) for v in values if isinstance(v, list)}
    if len(lengths) > 1:
        raise ValueError(f"per-set tau schedules differ in length: {sorted(lengths)}")
    return lengths.pop() if lengths else None


class ConstantLayout(BaseModel):
    """Same correlation radius everywhere."""

    kind: Literal["constant"] = "constant"
    tau: TauSchedule = Field(..., description="Correlation radius in frame intervals")

    def n_sets(self) -> Optional[int]:
        return schedule_length([self.tau])

    def region_masks(self, nx: int, ny: int, base_dir: Path) -> List[np.ndarray]:
        return []

    def tau_field(self, nx: int, ny: int, base_dir: Path, set_index: int = 0) -> TauField:
        return TauField.constant(nx, ny, tau_at(self.tau, set_index))


class DiskRegion(BaseModel):
    center: Tuple[float, float] = Field(..., description="Disk centre (x, y) in camera pixels")
    radius: float = Field(..., gt=0)
    tau: TauSchedule


class DisksLayout(BaseModel):
    """Circular regions over a uniform background."""

    kind: Literal["disks"] = "disks"
    disks: List[DiskRegion] = Field(..., min_length=1)
    background_tau: TauSchedule

    @model_validator(mode="after")
    def _check_schedules(self) -> "DisksLayout":
        self.n_sets()
        return self

    def n_sets(self) -> Optional[int]:
        return schedule_length([self.background_tau] + [d.tau for d in self.disks])

    def region_masks(self, nx: int, ny: int, base_dir: Path) -> List[np.ndarray]:
        return [disk_mask(nx, ny, d.center, d.radius) for d in self.disks]

    def tau_field(self, nx: int, ny: int, base_dir: Path, set_index: int = 0) -> TauField:
        masks = self.region_masks(nx, ny, base_dir)
        taus = (tau_at(d.tau, set_index) for d in self.disks)
        return compose_tau(nx, ny, tau_at(self.background_tau, set_index), zip(masks, taus))


class MaskRegion(BaseModel):
    """Region from a binary mask image or from rendered text."""

    path: Optional[Path] = None
    text: Optional[str] = None
    band: int = Field(default=0, ge=0)
    bands: int = Field(default=1, ge=1)
    tau: TauSchedule

    @model_validator(mode="after")
    def _one_source(self) -> "MaskRegion":
        if (self.path is None) == (self.text is None):
            raise ValueError("mask region needs exactly one of path or text")
        return self

    def mask(self, nx: int, ny: int, base_dir: Path) -> np.ndarray:
        if self.text is not None:
            return text_mask(self.text, nx, ny, band=self.band, bands=self.bands)
        path = self.path if self.path.is_absolute() else base_dir / self.path
        return load_mask(path, nx, ny)


class MasksLayout(BaseModel):
    """Mask-shaped regions over a uniform background."""

    kind: Literal["masks"] = "masks"
    regions: List[MaskRegion] = Field(..., min_length=1)
    background_tau: TauSchedule

    @model_validator(mode="after")
    def _check_schedules(self) -> "MasksLayout":
        self.n_sets()
        return self

    def n_sets(self) -> Optional[int]:
        return schedule_length([self.background_tau] + [r.tau for r in self.regions])

    def region_masks(self, nx: int, ny: int, base_dir: Path) -> List[np.ndarray]:
        return [r.mask(nx, ny, base_dir) for r in self.regions]

    def tau_field(self, nx: int, ny: int, base_dir: Path, set_index: int = 0) -> TauField:
        masks = self.region_masks(nx, ny, base_dir)
        taus = (tau_at(r.tau, set_index) for r in self.regions)
        return compose_tau(nx, ny, tau_at(self.background_tau, set_index), zip(masks, taus))


ActivityLayout = Annotated[Union[ConstantLayout, DisksLayout, MasksLayout], Field(discriminator="kind")]


class SynthesisSettings(BaseModel):
    """Camera, optics and seed of a synthetic scenario."""

    nx: int = Field(default=256, ge=8)
    ny: int = Field(default=256, ge=8)
    n_frames: int = Field(default=256, ge=2)
    dt: float = Field(default=1.0, gt=0)
    pixel_pitch: float = Field(default=1.0, gt=0)
    contrast: Optional[str] = Field(default="high_contrast", description="Contrast preset name")
    cutoff: Optional[float] = Field(default=None, gt=0, le=0.5, description="Explicit circ radius; overrides contrast")
    illumination: IlluminationProfile = IlluminationProfile()
    wavelength_nm: float = Field(default=532.0, gt=0)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)

    @field_validator("contrast")
    @classmethod
    def _known_preset(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in CONTRAST_PRESETS:
            raise ValueError(f"unknown contrast preset '{value}', expected one of {sorted(CONTRAST_PRESETS)}")
        return value

    def optics(self) -> OpticalSystem:
        if self.cutoff is not None:
            return OpticalSystem(cutoff=self.cutoff, wavelength_nm=self.wavelength_nm)
        return OpticalSystem.preset(self.contrast or "high_contrast", self.wavelength_nm)

    def to_config(self, tau_field: TauField, seed: Optional[int] = None) -> SynthesisConfig:
        return SynthesisConfig(
            nx=self.nx,
            ny=self.ny,
            n_frames=self.n_frames,
            dt=self.dt,
            pixel_pitch=self.pixel_pitch,
            tau_field=tau_field,
            illumination=self.illumination,
            optics=self.optics(),
            seed=self.seed if seed is None else seed,
        )


def _parse_estimator(value):
    if isinstance(value, str):
        try:
            return Estimator.parse(value)
        except AppException as e:
            raise ValueError(e.message)
    return value


def _check_grid(grid: List[CompressionSpec]) -> List[CompressionSpec]:
    if any(spec.format is CodecFormat.BMP for spec in grid):
        raise ValueError("bmp is always written as ground truth; leave it out of the grid")
    labels = [spec.label for spec in grid]
    if len(set(labels)) != len(labels):
        raise ValueError(f"compression grid has duplicate entries: {labels}")
    return grid


class ScenarioConfig(BaseModel):
    """Synthetic experiment: activity layout, synthesis, estimator and compression grid."""

    model_config = ConfigDict(frozen=True)

    schema_version: Literal[1] = SCHEMA_VERSION
    name: str
    description: str = ""
    synthesis: SynthesisSettings = SynthesisSettings()
    activity_layout: ActivityLayout
    estimator: Estimator = Estimator.S1
    q: Optional[float] = Field(default=None, ge=0)
    lag_m: int = Field(default=10, ge=1)
    compression_grid: List[CompressionSpec] = Field(default_factory=list)
    activity_sets: Optional[List[float]] = Field(
        default=None, min_length=1, description="Per-set scale factors of the tau field"
    )
    set_labels: Optional[List[str]] = None
    output_dir: Optional[Path] = None

    _source_dir: Path = PrivateAttr(default_factory=Path.cwd)

    @field_validator("estimator", mode="before")
    @classmethod
    def _estimator_name(cls, value):
        return _parse_estimator(value)

    @field_validator("compression_grid")
    @classmethod
    def _unique_grid(cls, value: List[CompressionSpec]) -> List[CompressionSpec]:
        return _check_grid(value)

    @field_validator("activity_sets")
    @classmethod
    def _positive_scales(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None and any(s <= 0 for s in value):
            raise ValueError("activity set scale factors must be positive")
        return value

    @model_validator(mode="after")
    def _check_consistency(self) -> "ScenarioConfig":
        if self.lag_m > self.synthesis.n_frames - 1:
            raise ValueError(f"lag_m={self.lag_m} needs more than {self.synthesis.n_frames} frames")
        scheduled = self.activity_layout.n_sets()
        if self.activity_sets is not None and scheduled is not None and scheduled != len(self.activity_sets):
            raise ValueError(
                f"activity_sets has {len(self.activity_sets)} entries but the layout schedules {scheduled} sets"
            )
        if self.set_labels is not None:
            declared = len(self.activity_sets) if self.activity_sets is not None else scheduled
            if declared is None or len(self.set_labels) != declared:
                raise ValueError("set_labels must match the number of activity sets")
        return self

    @property
    def source_dir(self) -> Path:
        return self._source_dir

    @property
    def is_multi_set(self) -> bool:
        """True when sets come from activity_sets or from per-set tau schedules."""
        return self.activity_sets is not None or self.activity_layout.n_sets() is not None

    @property
    def n_sets(self) -> int:
        if self.activity_sets:
            return len(self.activity_sets)
        return self.activity_layout.n_sets() or 1

    def labels(self) -> List[str]:
        if self.set_labels:
            return list(self.set_labels)
        return [f"set {i}" for i in range(self.n_sets)]

    def tau_field(self, set_index: int = 0) -> TauField:
        s = self.synthesis
        return self.activity_layout.tau_field(s.nx, s.ny, self._source_dir, set_index)

    def region_masks(self) -> List[np.ndarray]:
        s = self.synthesis
        return self.activity_layout.region_masks(s.nx, s.ny, self._source_dir)

    def synthesis_configs(self) -> List[SynthesisConfig]:
        """
        One synthesis config per activity set.

        Set i takes the layout's i-th tau schedule entries, scales the field by
        activity_sets[i] when given and uses seed + i.
        """
        if not self.is_multi_set:
            return [self.synthesis.to_config(self.tau_field())]
        configs = []
        for i in range(self.n_sets):
            tau = self.tau_field(i)
            if self.activity_sets:
                tau = tau.scaled(self.activity_sets[i])
            configs.append(self.synthesis.to_config(tau, seed=(self.synthesis.seed + i) % 2 ** 64))
        return configs


class IngestConfig(BaseModel):
    """Experimental frame files and how to group them into sequences."""

    model_config = ConfigDict(frozen=True)

    schema_version: Literal[1] = SCHEMA_VERSION
    name: str = "ingest"
    input_glob: str = Field(..., description="Glob of ordered frame files, relative to the config file")
    channel: Literal["red", "green", "blue", "luminance"] = "red"
    dt: float = Field(default=1.0, gt=0)
    pixel_pitch: float = Field(default=1.0, gt=0)
    frames_per_set: Optional[int] = Field(default=None, ge=2)
    set_stride: Optional[int] = Field(default=None, ge=1, description="Frames between set starts")
    interval_label: Optional[str] = Field(default=None, description="Time between sets, a label only")
    compression_grid: List[CompressionSpec] = Field(default_factory=list)
    output_dir: Optional[Path] = None

    _source_dir: Path = PrivateAttr(default_factory=Path.cwd)

    @field_validator("compression_grid")
    @classmethod
    def _unique_grid(cls, value: List[CompressionSpec]) -> List[CompressionSpec]:
        return _check_grid(value)

    @model_validator(mode="after")
    def _check_stride(self) -> "IngestConfig":
        if self.set_stride is not None and self.frames_per_set is None:
            raise ValueError("set_stride needs frames_per_set")
        return self

    @property
    def source_dir(self) -> Path:
        return self._source_dir

    def files(self) -> List[Path]:
        """Matching frame files in lexicographic order."""
        pattern = Path(self.input_glob)
        if pattern.is_absolute():
            base, relative = Path(pattern.anchor), str(pattern.relative_to(pattern.anchor))
        else:
            base, relative = self._source_dir, self.input_glob
        return sorted(p for p in base.glob(relative) if p.is_file())


def _load(model, path: Path):
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigurationException(f"file not found: {path}")
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationException(f"cannot read {path}: {e}")
    try:
        config = model.model_validate(data)
    except ValidationError as e:
        raise ConfigurationException(f"{path}: {_validation_summary(e)}")
    config._source_dir = path.resolve().parent
    return config


def _validation_summary(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]) or "<root>"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


def load_scenario(path: Path) -> ScenarioConfig:
    """Read and validate a scenario JSON file."""
    return _load(ScenarioConfig, path)


def load_ingest_config(path: Path) -> IngestConfig:
    """Read and validate an ingest JSON file."""
    return _load(IngestConfig, path)


def preset_scenario(name: str) -> ScenarioConfig:
    """Load one of the scenario files shipped in scenarios/."""
    path = SCENARIO_DIR / f"{name}.json"
    if not path.is_file():
        available = sorted(p.stem for p in SCENARIO_DIR.glob("*.json"))
        raise ConfigurationException(f"unknown scenario preset '{name}', expected one of {available}")
    return load_scenario(path)


def scenario_hash(scenario: ScenarioConfig) -> str:
    """Short sha256 of the scenario content; the output directory is not part of it."""
    payload = scenario.model_dump_json(exclude={"output_dir"})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def with_overrides(scenario: ScenarioConfig, **changes) -> ScenarioConfig:
    """
    Copy of a scenario with top-level or synthesis fields replaced and revalidated.

    Keys of `changes` that are SynthesisSettings fields go to the synthesis block.
    None values are ignored. When a shorter sequence leaves no room for the
    scenario's own lag, the lag is clamped to n_frames - 1; an explicit lag_m
    is validated as given.
    """
    changes = {k: v for k, v in changes.items() if v is not None}
    synthesis_keys = set(SynthesisSettings.model_fields) & set(changes)
    data = scenario.model_dump()
    for key in synthesis_keys:
        data["synthesis"][key] = changes.pop(key)
    data.update(changes)
    n_frames = data["synthesis"]["n_frames"]
    if "lag_m" not in changes and data["lag_m"] > n_frames - 1:
        logger.warning(f"lag_m={data['lag_m']} does not fit {n_frames} frames, recording lag_m={n_frames - 1}")
        data["lag_m"] = n_frames - 1
    try:
        updated = ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationException(_validation_summary(e))
    updated._source_dir = scenario.source_dir
    return updated
