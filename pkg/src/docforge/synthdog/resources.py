"""Resolved assets for the generator: corpus, image pools and fonts."""

from __future__ import annotations

import io
import threading
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from fontTools.ttLib import TTFont, TTLibError
from PIL import Image, ImageFont

from ..corpus_io import AssetPool, CorpusSource, expand_paths, load_corpus, load_pool
from ..errors import AssetMissing, EmptyPool
from .config import GenConfig

BUILTIN_FONT = "builtin"
PROCEDURAL_BACKGROUND = "procedural"
FLAT_TEXTURE = "flat"


class FontBank:
    """Font objects, glyph coverage and text metrics, safe to share across threads.

    FreeType faces are not shared between threads; each thread opens its own.
    """

    def __init__(self, pool: AssetPool | None = None):
        self._paths: dict[str, Path] = dict(pool.entries) if pool else {}
        self._local = threading.local()
        self._lock = threading.Lock()
        self._coverage: dict[str, frozenset] = {}

    def ids(self) -> list[str]:
        return sorted(self._paths) if self._paths else [BUILTIN_FONT]

    def _cache(self) -> dict:
        cache = getattr(self._local, "fonts", None)
        if cache is None:
            cache = self._local.fonts = {}
            self._local.metrics = {}
        return cache

    def font(self, font_id: str, size: int) -> ImageFont.FreeTypeFont:
        cache = self._cache()
        key = (font_id, size)
        font = cache.get(key)
        if font is None:
            if font_id == BUILTIN_FONT:
                font = ImageFont.load_default(size)
            elif font_id in self._paths:
                try:
                    font = ImageFont.truetype(str(self._paths[font_id]), size,
                                              layout_engine=ImageFont.Layout.BASIC)
                except OSError as exc:
                    raise AssetMissing(font_id) from exc
            else:
                raise AssetMissing(font_id)
            cache[key] = font
        return font

    def coverage(self, font_id: str) -> frozenset:
        with self._lock:
            cached = self._coverage.get(font_id)
        if cached is not None:
            return cached
        if font_id == BUILTIN_FONT:
            source = io.BytesIO(ImageFont.load_default(10).font_bytes)
        elif font_id in self._paths:
            source = str(self._paths[font_id])
        else:
            raise AssetMissing(font_id)
        try:
            with TTFont(source, fontNumber=0, lazy=True) as tt:
                cmap = frozenset(tt.getBestCmap() or ())
        except (OSError, TTLibError) as exc:
            raise AssetMissing(font_id) from exc
        with self._lock:
            self._coverage[font_id] = cmap
        return cmap

    def missing_glyph(self, font_id: str, text: str) -> int | None:
        cmap = self.coverage(font_id)
        for ch in text:
            if ord(ch) not in cmap:
                return ord(ch)
        return None

    def measure(self, font_id: str, size: int, text: str) -> tuple[int, int, int, int]:
        """Tight ink box of ``text`` drawn at the origin (left/ascender anchor)."""
        self._cache()
        metrics = self._local.metrics
        key = (font_id, size, text)
        box = metrics.get(key)
        if box is None:
            box = tuple(int(v) for v in self.font(font_id, size).getbbox(text, anchor="la"))
            metrics[key] = box
        return box

    def space_width(self, font_id: str, size: int) -> int:
        return max(1, round(self.font(font_id, size).getlength(" ")))


@dataclass
class Resources:
    corpus: CorpusSource
    backgrounds: AssetPool
    textures: AssetPool
    fonts: FontBank
    fallbacks: bool = True

    def __post_init__(self):
        self._images: dict[tuple[str, str], np.ndarray] = {}
        self._lock = threading.Lock()

    def background_ids(self) -> list[str]:
        return self._ids(self.backgrounds, PROCEDURAL_BACKGROUND)

    def texture_ids(self) -> list[str]:
        return self._ids(self.textures, FLAT_TEXTURE)

    def font_ids(self) -> list[str]:
        return self.fonts.ids()

    def _ids(self, pool: AssetPool, fallback: str) -> list[str]:
        if len(pool):
            return pool.ids()
        if not self.fallbacks:
            raise EmptyPool(pool.kind)
        return [fallback]

    def image(self, kind: str, asset_id: str) -> np.ndarray:
        """Decoded RGB image (read-only array), cached."""
        key = (kind, asset_id)
        with self._lock:
            cached = self._images.get(key)
        if cached is not None:
            return cached
        pool = self.backgrounds if kind == "background" else self.textures
        try:
            with Image.open(pool.path(asset_id)) as img:
                array = np.asarray(img.convert("RGB")).copy()
        except (KeyError, OSError) as exc:
            raise AssetMissing(asset_id) from exc
        array.setflags(write=False)
        with self._lock:
            self._images[key] = array
        return array


def build_resources(config: GenConfig) -> Resources:
    corpus = load_corpus(expand_paths(config.corpus, (".txt",)))
    if corpus.fallback and not config.fallbacks:
        raise EmptyPool("corpus")
    fonts = load_pool("font", config.fonts)
    if not len(fonts) and not config.fallbacks:
        raise EmptyPool("font")
    return Resources(
        corpus=corpus,
        backgrounds=load_pool("background", config.backgrounds),
        textures=load_pool("texture", config.textures),
        fonts=FontBank(fonts),
        fallbacks=config.fallbacks,
    )


@lru_cache(maxsize=8)
def resources_for(config: GenConfig) -> Resources:
    return build_resources(config)
