"""Generator configuration and its file format.

The config file is TOML (``.toml``) or JSON (``.json``) holding a flat
table of the keys below; ranges are ``[min, max]`` pairs.

=====================  ================  ===========================================
key                    default           meaning
=====================  ================  ===========================================
width, height          [512,512] [384,384]  canvas size range in px (min 64)
corpus                 []                text files or directories (``*.txt``)
backgrounds            []                background image files or directories
textures               []                paper texture image files or directories
fonts                  []                font files or directories
fallbacks              true              procedural assets for empty pools
document_scale         [0.75, 0.95]      document size as a fraction of the canvas
margin                 [8, 32]           document margin in px
columns                [1, 3]            column count
rows                   [1, 3]            rows per column
gutter                 [8, 24]           space between regions in px
lines                  [1, 40]           max lines per region
line_height            [14, 28]          line pitch in px (font size is 3/4 of it)
alignment              [0.7, 0.15, 0.15] weights for left / center / right
phrase_length          [1, 8]            words per contiguous corpus run
blur_sigma             [0.0, 1.0]        Gaussian blur sigma in px
noise_std              [0.0, 6.0]        additive Gaussian noise stddev (0-255 scale)
perspective            [0.0, 0.06]       corner jitter as a fraction of document size
brightness             [-0.08, 0.08]     additive offset as a fraction of 255
contrast               [0.85, 1.15]      contrast gain around mid-gray
shadow_probability     0.3               chance of a cast shadow
seed                   0                 master seed (64-bit)
=====================  ================  ===========================================
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

from ..errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

RANGE_KEYS = (
    "width", "height", "document_scale", "margin", "columns", "rows", "gutter", "lines",
    "line_height", "phrase_length", "blur_sigma", "noise_std", "perspective",
    "brightness", "contrast",
)
INT_RANGES = {"width", "height", "margin", "columns", "rows", "gutter", "lines",
              "line_height", "phrase_length"}
PATH_KEYS = ("corpus", "backgrounds", "textures", "fonts")


@dataclass(frozen=True)
class GenConfig:
    width: tuple = (512, 512)
    height: tuple = (384, 384)
    corpus: tuple = ()
    backgrounds: tuple = ()
    textures: tuple = ()
    fonts: tuple = ()
    fallbacks: bool = True
    document_scale: tuple = (0.75, 0.95)
    margin: tuple = (8, 32)
    columns: tuple = (1, 3)
    rows: tuple = (1, 3)
    gutter: tuple = (8, 24)
    lines: tuple = (1, 40)
    line_height: tuple = (14, 28)
    alignment: tuple = (0.7, 0.15, 0.15)
    phrase_length: tuple = (1, 8)
    blur_sigma: tuple = (0.0, 1.0)
    noise_std: tuple = (0.0, 6.0)
    perspective: tuple = (0.0, 0.06)
    brightness: tuple = (-0.08, 0.08)
    contrast: tuple = (0.85, 1.15)
    shadow_probability: float = 0.3
    seed: int = 0

    def __post_init__(self):
        for key in RANGE_KEYS:
            value = getattr(self, key)
            if not (isinstance(value, (tuple, list)) and len(value) == 2):
                raise ConfigError(f"{key} must be a [min, max] pair")
            lo, hi = value
            if key in INT_RANGES:
                if not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
                    raise ConfigError(f"{key} must hold integers")
            elif not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
                raise ConfigError(f"{key} must hold numbers")
            if lo > hi:
                raise ConfigError(f"{key}: min {lo} exceeds max {hi}")
            object.__setattr__(self, key, (lo, hi))
        for key in PATH_KEYS:
            value = getattr(self, key)
            if isinstance(value, str):
                value = (value,)
            if not all(isinstance(v, str) for v in value):
                raise ConfigError(f"{key} must be a list of paths")
            object.__setattr__(self, key, tuple(value))
        if self.width[0] < 64 or self.height[0] < 64:
            raise ConfigError("canvas must be at least 64x64")
        if self.columns[0] < 1 or self.rows[0] < 1 or self.lines[0] < 1 or self.phrase_length[0] < 1:
            raise ConfigError("columns, rows, lines and phrase_length must be >= 1")
        if self.line_height[0] < 8:
            raise ConfigError("line_height must be >= 8 px")
        if self.margin[0] < 0 or self.gutter[0] < 0:
            raise ConfigError("margin and gutter must be >= 0")
        if not (0 < self.document_scale[0] and self.document_scale[1] <= 1):
            raise ConfigError("document_scale must lie in (0, 1]")
        if self.blur_sigma[0] < 0 or self.noise_std[0] < 0 or self.contrast[0] < 0:
            raise ConfigError("blur_sigma, noise_std and contrast must be >= 0")
        if not (0 <= self.perspective[0] and self.perspective[1] < 0.5):
            raise ConfigError("perspective must lie in [0, 0.5)")
        weights = tuple(self.alignment)
        if len(weights) != 3 or any(w < 0 for w in weights) or sum(weights) <= 0:
            raise ConfigError("alignment needs three non-negative weights with a positive sum")
        object.__setattr__(self, "alignment", weights)
        if not 0.0 <= self.shadow_probability <= 1.0:
            raise ConfigError("shadow_probability must lie in [0, 1]")
        if not isinstance(self.fallbacks, bool):
            raise ConfigError("fallbacks must be true or false")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an integer in [0, 2**64)")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], base: Path | None = None) -> "GenConfig":
        """Build a config from parsed file contents.

        Relative asset paths are resolved against ``base`` (the config
        file's directory).
        """
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values = {}
        for key, value in data.items():
            if isinstance(value, list):
                value = tuple(value)
            if key in PATH_KEYS and base is not None:
                value = tuple(str(base / p) for p in ((value,) if isinstance(value, str) else value))
            values[key] = value
        try:
            return cls(**values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def with_overrides(self, overrides: Mapping[str, Any]) -> "GenConfig":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values = {k: tuple(v) if isinstance(v, list) else v for k, v in overrides.items()}
        return replace(self, **values)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


def load_config(path: str | Path) -> GenConfig:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or 'unreadable'}") from exc
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(raw.decode("utf-8"))
        else:
            data = tomllib.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a table of settings")
    return GenConfig.from_mapping(data, base=path.parent)


def parse_override(text: str) -> tuple[str, Any]:
    """``key=value`` with the value read as JSON when possible (else a string)."""
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override {text!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except ValueError:
        value = raw
    return key.strip(), value
