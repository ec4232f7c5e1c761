"""Codec selection: BMP reference, JPEG at quality Q, JPEG2000 at ratio eta."""
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class CodecFormat(str, Enum):
    BMP = "bmp"
    JPEG = "jpg"
    JPEG2000 = "jp2"


class CompressionSpec(BaseModel):
    """
    One compression setting.

    JPEG takes either a quality (1-100) or a target size ratio, resolved to a
    quality per sequence; JPEG2000 takes a compression ratio >= 1; BMP takes
    no parameter. String forms: ``bmp``, ``jpg:q=10``, ``jpg:ratio=10``,
    ``jp2:ratio=6`` (``jpg:10`` and ``jp2:6`` are shorthands).
    """

    model_config = ConfigDict(frozen=True)

    format: CodecFormat
    quality: Optional[int] = Field(default=None, ge=1, le=100)
    ratio: Optional[float] = Field(default=None, ge=1.0)

    @model_validator(mode="before")
    @classmethod
    def _from_string(cls, data: Any) -> Any:
        if isinstance(data, str):
            return _parse_fields(data)
        return data

    @model_validator(mode="after")
    def _check_parameters(self) -> "CompressionSpec":
        if self.format is CodecFormat.BMP and (self.quality is not None or self.ratio is not None):
            raise ValueError("bmp takes no parameter")
        if self.format is CodecFormat.JPEG and (self.quality is None) == (self.ratio is None):
            raise ValueError("jpg needs exactly one of quality or ratio")
        if self.format is CodecFormat.JPEG2000 and (self.ratio is None or self.quality is not None):
            raise ValueError("jp2 needs a ratio and no quality")
        return self

    @classmethod
    def bmp(cls) -> "CompressionSpec":
        return cls(format=CodecFormat.BMP)

    @classmethod
    def jpeg(cls, quality: int) -> "CompressionSpec":
        return cls(format=CodecFormat.JPEG, quality=quality)

    @classmethod
    def jpeg_ratio(cls, ratio: float) -> "CompressionSpec":
        return cls(format=CodecFormat.JPEG, ratio=ratio)

    @classmethod
    def jpeg2000(cls, ratio: float) -> "CompressionSpec":
        return cls(format=CodecFormat.JPEG2000, ratio=ratio)

    @classmethod
    def parse(cls, text: str) -> "CompressionSpec":
        return cls.model_validate(text)

    @property
    def is_lossless(self) -> bool:
        return self.format is CodecFormat.BMP

    @property
    def extension(self) -> str:
        return f".{self.format.value}"

    @property
    def label(self) -> str:
        """Directory-safe name, e.g. ``jpg_q10`` or ``jp2_x6``."""
        if self.format is CodecFormat.BMP:
            return "bmp"
        if self.quality is not None:
            return f"{self.format.value}_q{self.quality}"
        return f"{self.format.value}_x{self.ratio:g}"

    def __str__(self) -> str:
        if self.format is CodecFormat.BMP:
            return "bmp"
        if self.quality is not None:
            return f"{self.format.value}:q={self.quality}"
        return f"{self.format.value}:ratio={self.ratio:g}"


def _parse_fields(text: str) -> dict:
    name, _, param = text.strip().lower().partition(":")
    fields: dict = {"format": name}
    if not param:
        return fields
    key, sep, value = param.partition("=")
    if not sep:
        key, value = ("quality" if name == CodecFormat.JPEG.value else "ratio"), key
    key = {"q": "quality", "eta": "ratio", "r": "ratio"}.get(key.strip(), key.strip())
    if key not in ("quality", "ratio"):
        raise ValueError(f"unknown compression parameter '{key}' in '{text}'")
    fields[key] = value.strip()
    return fields
