"""Sampling a complete, immutable description of one synthetic document.

All randomness of the generator is drawn here. ``render`` only executes
the plan, so a plan fully determines the image and its annotation.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import GenerationError
from .config import GenConfig
from .resources import Resources, resources_for

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
ALIGNMENTS = ("left", "center", "right")
MIN_REGION_WIDTH = 40
MIN_FONT_SIZE = 6
MAX_SKIPS = 64  # consecutive unusable words before a line is abandoned


def mix64(z: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def sample_seed(master_seed: int, index: int) -> int:
    """Per-image seed: ``mix64(master_seed + (index + 1) * 0x9E3779B97F4A7C15)``.

    Distinct indices below 2**64 always give distinct seeds for one master
    seed, since the state step is odd and the mix is bijective.
    """
    return mix64(master_seed + (index + 1) * GOLDEN_GAMMA)


@dataclass(frozen=True)
class Word:
    text: str
    origin: tuple[int, int]
    box: tuple[int, int, int, int]  # tight ink box in document space


@dataclass(frozen=True)
class Line:
    top: int
    words: tuple[Word, ...]


@dataclass(frozen=True)
class Region:
    box: tuple[int, int, int, int]
    font_id: str
    font_size: int
    line_height: int
    align: str
    color: tuple[int, int, int]
    lines: tuple[Line, ...]


@dataclass(frozen=True)
class Shadow:
    normal: tuple[float, float]
    offset: float
    strength: float
    softness: float


@dataclass(frozen=True)
class Effects:
    blur_sigma: float = 0.0
    noise_std: float = 0.0
    noise_seed: int = 0
    brightness: float = 0.0
    contrast: float = 1.0
    shadow: Shadow | None = None


@dataclass(frozen=True)
class RenderPlan:
    seed: int
    canvas: tuple[int, int]
    doc_size: tuple[int, int]
    quad: tuple[tuple[float, float], ...]  # TL, TR, BR, BL in canvas pixels
    background_id: str
    background_seed: int
    background_colors: tuple[tuple[int, int, int], tuple[int, int, int]]
    background_crop: tuple[float, float]
    texture_id: str
    paper_color: tuple[int, int, int]
    regions: tuple[Region, ...]
    effects: Effects

    def words(self):
        for region in self.regions:
            for line in region.lines:
                yield from line.words

    def to_dict(self) -> dict:
        return asdict(self)


class _WordStream:
    """Endless words from contiguous corpus runs ("phrases"), wrapping around."""

    def __init__(self, documents, rng: np.random.Generator, phrase_length):
        self._docs = documents
        self._rng = rng
        self._lo, self._hi = phrase_length
        self._queue: deque[str] = deque()

    def next(self) -> str:
        if not self._queue:
            doc = self._docs[int(self._rng.integers(len(self._docs)))]
            start = int(self._rng.integers(len(doc)))
            length = int(self._rng.integers(self._lo, self._hi + 1))
            self._queue.extend(doc[(start + k) % len(doc)] for k in range(length))
        return self._queue.popleft()

    def push_back(self, word: str) -> None:
        self._queue.appendleft(word)


def _uniform(rng, bounds) -> float:
    lo, hi = bounds
    return float(lo) if lo == hi else float(rng.uniform(lo, hi))


def _integer(rng, bounds) -> int:
    lo, hi = bounds
    return int(lo) if lo == hi else int(rng.integers(lo, hi + 1))


def _split(total: int, parts: int, gap: int, rng) -> list[tuple[int, int]]:
    """Cut ``total`` px into ``parts`` spans of random relative size with gaps."""
    avail = total - gap * (parts - 1)
    weights = rng.uniform(0.6, 1.4, parts)
    sizes = np.floor(avail * weights / weights.sum()).astype(int)
    spans, pos = [], 0
    for size in sizes:
        spans.append((pos, pos + int(size)))
        pos += int(size) + gap
    return spans


def _is_convex(quad) -> bool:
    signs = []
    for k in range(4):
        (x0, y0), (x1, y1), (x2, y2) = quad[k], quad[(k + 1) % 4], quad[(k + 2) % 4]
        signs.append((x1 - x0) * (y2 - y1) - (y1 - y0) * (x2 - x1))
    return all(s > 0 for s in signs) or all(s < 0 for s in signs)


def _sample_quad(rng, canvas, rect, jitter_range):
    w, h = canvas
    x0, y0, x1, y1 = rect
    base = ((x0, y0), (x1, y0), (x1, y1), (x0, y1))
    jitter = _uniform(rng, jitter_range)
    dw, dh = x1 - x0, y1 - y0
    for _ in range(6):
        if jitter <= 0:
            break
        offsets = rng.uniform(-jitter, jitter, (4, 2)) * (dw, dh)
        quad = tuple((round(px + ox, 3), round(py + oy, 3))
                     for (px, py), (ox, oy) in zip(base, offsets))
        if _is_convex(quad) and all(0 <= x <= w and 0 <= y <= h for x, y in quad):
            return quad
        jitter /= 2
    return tuple((float(x), float(y)) for x, y in base)


def _fill_region(box, font_id, font_size, line_height, align, color, max_lines,
                 stream: _WordStream, res: Resources) -> Region | None:
    x0, y0, x1, y1 = box
    width = x1 - x0
    n_lines = min(max_lines, (y1 - y0) // line_height)
    bank = res.fonts
    space = bank.space_width(font_id, font_size)
    lines = []
    for li in range(n_lines):
        top = y0 + li * line_height
        picked = []  # (text, left bearing, width, top, bottom)
        cursor = skips = 0
        while skips < MAX_SKIPS:
            text = stream.next()
            if bank.missing_glyph(font_id, text) is not None:
                skips += 1
                continue
            l, t, r, b = bank.measure(font_id, font_size, text)
            w = r - l
            if w <= 0 or b <= t or t < 0 or b > line_height or top + b > y1:
                skips += 1
                continue
            need = w if not picked else cursor + space + w
            if need <= width:
                picked.append((text, l, w, t, b))
                cursor = need
            elif not picked:
                skips += 1  # longer than the whole line
            else:
                stream.push_back(text)
                break
        if not picked:
            break
        shift = {"left": 0, "center": (width - cursor) // 2, "right": width - cursor}[align]
        x = x0 + shift
        words = []
        for text, l, w, t, b in picked:
            words.append(Word(text, (x - l, top), (x, top + t, x + w, top + b)))
            x += w + space
        lines.append(Line(top, tuple(words)))
    if not lines:
        return None
    return Region(tuple(box), font_id, font_size, line_height, align, color, tuple(lines))


def _font_size(line_height: int) -> int:
    return max(MIN_FONT_SIZE, round(line_height * 0.75))


def _layout(rng, config: GenConfig, doc_size, stream, res: Resources) -> list[Region]:
    dw, dh = doc_size
    margin = min(_integer(rng, config.margin), max(0, (min(dw, dh) - 24) // 2))
    inner_w, inner_h = dw - 2 * margin, dh - 2 * margin
    gutter = _integer(rng, config.gutter)
    lh_min = config.line_height[0]

    n_cols = _integer(rng, config.columns)
    while n_cols > 1 and (inner_w - gutter * (n_cols - 1)) / n_cols < MIN_REGION_WIDTH:
        n_cols -= 1
    fonts = res.font_ids()
    weights = np.asarray(config.alignment, dtype=float)
    weights = weights / weights.sum()

    regions = []
    for cx0, cx1 in _split(inner_w, n_cols, gutter, rng):
        n_rows = _integer(rng, config.rows)
        while n_rows > 1 and (inner_h - gutter * (n_rows - 1)) / n_rows < lh_min:
            n_rows -= 1
        for ry0, ry1 in _split(inner_h, n_rows, gutter, rng):
            box = (margin + cx0, margin + ry0, margin + cx1, margin + ry1)
            font_id = fonts[int(rng.integers(len(fonts)))]
            line_height = _integer(rng, config.line_height)
            align = ALIGNMENTS[int(rng.choice(3, p=weights))]
            color = tuple(int(c) for c in rng.integers(0, 90, 3))
            max_lines = _integer(rng, config.lines)
            if box[3] - box[1] < line_height or box[2] - box[0] < 1:
                continue
            region = _fill_region(box, font_id, _font_size(line_height), line_height, align,
                                  color, max_lines, stream, res)
            if region is not None:
                regions.append(region)

    if not regions:
        regions = _fallback_region(margin, inner_w, inner_h, fonts[0], stream, res, lh_min)
    regions.sort(key=lambda r: (r.box[1], r.box[0]))
    return regions


def _fallback_region(margin, inner_w, inner_h, font_id, stream, res, lh_min) -> list[Region]:
    """One line of text in the whole inner area, shrinking the font until a word fits."""
    line_height = min(lh_min, inner_h)
    while line_height >= 8:
        box = (margin, margin, margin + inner_w, margin + line_height)
        region = _fill_region(box, font_id, _font_size(line_height), line_height, "left",
                              (0, 0, 0), 1, stream, res)
        if region is not None:
            return [region]
        line_height -= 2
    raise GenerationError("no corpus word fits on the document")


def plan(config: GenConfig, index: int, resources: Resources | None = None) -> RenderPlan:
    """Sample the plan of image ``index``; a pure function of (config, index)."""
    if index < 0:
        raise ValueError("index must be non-negative")
    res = resources if resources is not None else resources_for(config)
    seed = sample_seed(config.seed, index)
    rng = np.random.default_rng(seed)

    canvas = (_integer(rng, config.width), _integer(rng, config.height))
    dw = max(32, round(canvas[0] * _uniform(rng, config.document_scale)))
    dh = max(32, round(canvas[1] * _uniform(rng, config.document_scale)))
    dw, dh = min(dw, canvas[0]), min(dh, canvas[1])
    x0 = int(rng.integers(canvas[0] - dw + 1))
    y0 = int(rng.integers(canvas[1] - dh + 1))
    quad = _sample_quad(rng, canvas, (x0, y0, x0 + dw, y0 + dh), config.perspective)

    backgrounds = res.background_ids()
    background_id = backgrounds[int(rng.integers(len(backgrounds)))]
    background_seed = int(rng.integers(2**63))
    background_colors = tuple(tuple(int(c) for c in rng.integers(0, 256, 3)) for _ in range(2))
    background_crop = (float(rng.random()), float(rng.random()))
    textures = res.texture_ids()
    texture_id = textures[int(rng.integers(len(textures)))]
    paper_level = int(rng.integers(225, 256))
    paper_color = tuple(int(min(255, paper_level - t)) for t in rng.integers(0, 12, 3))

    stream = _WordStream(res.corpus.documents, rng, config.phrase_length)
    regions = _layout(rng, config, (dw, dh), stream, res)

    shadow = None
    if rng.random() < config.shadow_probability:
        theta = float(rng.uniform(0, 2 * math.pi))
        normal = (math.cos(theta), math.sin(theta))
        px, py = rng.uniform(0, canvas[0]), rng.uniform(0, canvas[1])
        shadow = Shadow(normal, float(-(normal[0] * px + normal[1] * py)),
                        float(rng.uniform(0.15, 0.45)),
                        float(rng.uniform(0.05, 0.25) * min(canvas)))
    effects = Effects(
        blur_sigma=_uniform(rng, config.blur_sigma),
        noise_std=_uniform(rng, config.noise_std),
        noise_seed=int(rng.integers(2**63)),
        brightness=_uniform(rng, config.brightness),
        contrast=_uniform(rng, config.contrast),
        shadow=shadow,
    )
    return RenderPlan(
        seed=seed,
        canvas=canvas,
        doc_size=(dw, dh),
        quad=quad,
        background_id=background_id,
        background_seed=background_seed,
        background_colors=background_colors,
        background_crop=background_crop,
        texture_id=texture_id,
        paper_color=paper_color,
        regions=tuple(regions),
        effects=effects,
    )
