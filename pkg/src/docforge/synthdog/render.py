"""Executing a render plan: pixels plus the matching annotation.

``render`` draws nothing at random. Every stochastic value, including the
seeds for procedural noise, comes from the plan.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import cv2
import numpy as np
from PIL import Image, ImageDraw

from .. import codec
from ..errors import FontGlyphMissing
from .plan import RenderPlan
from .resources import FLAT_TEXTURE, PROCEDURAL_BACKGROUND, Resources

SYNTH_VOCAB = codec.Vocab(fields={"text_sequence"}, classes=(), prompts={"read_text"})


@dataclass(frozen=True)
class WordRecord:
    text: str
    quad: tuple[tuple[float, float], ...]  # TL, TR, BR, BL in image pixels
    region: int
    line: int


@dataclass
class Annotation:
    text: str
    words: list[WordRecord]
    gt_parse: dict
    target: list = field(default_factory=list)

    def to_record(self, file_name: str) -> dict:
        return {
            "file_name": file_name,
            "ground_truth": {"gt_parse": self.gt_parse},
            "words": [{"text": w.text, "quad": [list(p) for p in w.quad]} for w in self.words],
        }


def homography(plan: RenderPlan) -> np.ndarray:
    """Maps continuous document coordinates onto the document quad."""
    dw, dh = plan.doc_size
    src = [(0, 0), (dw, 0), (dw, dh), (0, dh)]
    rows, rhs = [], []
    for (x, y), (u, v) in zip(src, plan.quad):
        rows.append([x, y, 1, 0, 0, 0, -u * x, -u * y])
        rows.append([0, 0, 0, x, y, 1, -v * x, -v * y])
        rhs.extend((u, v))
    coeffs = np.linalg.solve(np.array(rows, np.float64), np.array(rhs, np.float64))
    return np.append(coeffs, 1.0).reshape(3, 3)


def apply_homography(h: np.ndarray, points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    homo = np.hstack([pts, np.ones((len(pts), 1))]) @ h.T
    return homo[:, :2] / homo[:, 2:3]


def _value_noise(seed: int, size: tuple[int, int]) -> np.ndarray:
    """Smooth noise in [0, 1]: bicubically upsampled random grids, 4 octaves."""
    w, h = size
    rng = np.random.default_rng(seed)
    acc = np.zeros((h, w), np.float32)
    total = 0.0
    for octave in range(4):
        cells = 3 * 2**octave
        grid = rng.random((cells + 1, cells + 1)).astype(np.float32)
        amp = 0.5**octave
        acc += amp * cv2.resize(grid, (w, h), interpolation=cv2.INTER_CUBIC)
        total += amp
    return np.clip(acc / total, 0.0, 1.0)


def _cover(image: np.ndarray, size: tuple[int, int], crop: tuple[float, float]) -> np.ndarray:
    """Scale ``image`` to cover ``size`` and cut a window at fractional offset ``crop``."""
    w, h = size
    ih, iw = image.shape[:2]
    scale = max(w / iw, h / ih)
    sw, sh = max(w, round(iw * scale)), max(h, round(ih * scale))
    resized = cv2.resize(image, (sw, sh), interpolation=cv2.INTER_AREA if scale < 1 else cv2.INTER_LINEAR)
    x = int(crop[0] * (sw - w))
    y = int(crop[1] * (sh - h))
    return resized[y:y + h, x:x + w]


def _background(plan: RenderPlan, res: Resources) -> np.ndarray:
    size = plan.canvas
    if plan.background_id == PROCEDURAL_BACKGROUND:
        t = _value_noise(plan.background_seed, size)[..., None]
        c0, c1 = (np.float32(c) for c in plan.background_colors)
        return c0 * (1 - t) + c1 * t
    return _cover(res.image("background", plan.background_id), size,
                  plan.background_crop).astype(np.float32)


def _document(plan: RenderPlan, res: Resources) -> np.ndarray:
    dw, dh = plan.doc_size
    paper = np.array(plan.paper_color, np.float32)
    if plan.texture_id == FLAT_TEXTURE:
        doc = np.broadcast_to(paper, (dh, dw, 3))
    else:
        texture = _cover(res.image("texture", plan.texture_id), (dw, dh), (0.5, 0.5))
        doc = texture.astype(np.float32) * (paper / 255.0)
    page = Image.fromarray(np.rint(doc).astype(np.uint8), mode="RGB")
    draw = ImageDraw.Draw(page)
    bank = res.fonts
    for region in plan.regions:
        font = bank.font(region.font_id, region.font_size)
        for line in region.lines:
            for word in line.words:
                missing = bank.missing_glyph(region.font_id, word.text)
                if missing is not None:
                    raise FontGlyphMissing(missing, region.font_id)
                draw.text(word.origin, word.text, font=font, fill=region.color, anchor="la")
    return np.asarray(page, np.float32)


def _shadow_mask(plan: RenderPlan) -> np.ndarray:
    s = plan.effects.shadow
    w, h = plan.canvas
    xs = np.arange(w, dtype=np.float32) + 0.5
    ys = np.arange(h, dtype=np.float32) + 0.5
    dist = s.normal[0] * xs[None, :] + s.normal[1] * ys[:, None] + s.offset
    t = np.clip(dist / s.softness + 0.5, 0.0, 1.0)
    t = t * t * (3 - 2 * t)
    return (1.0 - s.strength * t)[..., None]


def render(plan: RenderPlan, resources: Resources) -> tuple[np.ndarray, Annotation]:
    """Rasterize ``plan``; returns an HxWx3 uint8 RGB image and its annotation.

    Pipeline: background, textured page with text, perspective warp onto
    the document quad, blur, brightness/contrast, noise, shadow.
    """
    w, h = plan.canvas
    h_cont = homography(plan)
    shift = np.array([[1, 0, 0.5], [0, 1, 0.5], [0, 0, 1]])
    unshift = np.array([[1, 0, -0.5], [0, 1, -0.5], [0, 0, 1]])
    h_pix = unshift @ h_cont @ shift

    doc = _document(plan, resources)
    ones = np.ones(doc.shape[:2], np.float32)
    warped = cv2.warpPerspective(doc, h_pix, (w, h), flags=cv2.INTER_LINEAR,
                                 borderMode=cv2.BORDER_CONSTANT, borderValue=0)
    alpha = cv2.warpPerspective(ones, h_pix, (w, h), flags=cv2.INTER_LINEAR,
                                borderMode=cv2.BORDER_CONSTANT, borderValue=0)[..., None]
    # warped is effectively premultiplied by alpha
    img = _background(plan, resources) * (1.0 - alpha) + warped

    fx = plan.effects
    if fx.blur_sigma > 0:
        img = cv2.GaussianBlur(img, (0, 0), fx.blur_sigma)
    img = (img - 127.5) * fx.contrast + 127.5 + fx.brightness * 255.0
    if fx.noise_std > 0:
        noise = np.random.default_rng(fx.noise_seed).standard_normal((h, w, 1), np.float32)
        img = img + noise * np.float32(fx.noise_std)
    if fx.shadow is not None:
        img = img * _shadow_mask(plan)
    image = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    return image, annotate(plan, h_cont)


def annotate(plan: RenderPlan, h_cont: np.ndarray | None = None) -> Annotation:
    """Reading-order text and warped word quads for ``plan``."""
    if h_cont is None:
        h_cont = homography(plan)
    placed = [(ri, li, word) for ri, region in enumerate(plan.regions)
              for li, line in enumerate(region.lines) for word in line.words]
    corners = [((x0, y0), (x1, y0), (x1, y1), (x0, y1))
               for x0, y0, x1, y1 in (word.box for _, _, word in placed)]
    mapped = np.round(apply_homography(h_cont, corners), 2).reshape(-1, 4, 2).tolist()
    records = [WordRecord(word.text, tuple(tuple(p) for p in quad), ri, li)
               for (ri, li, word), quad in zip(placed, mapped)]
    text = " ".join(r.text for r in records)
    gt_parse = {"text_sequence": text}
    return Annotation(text, records, gt_parse, codec.encode(gt_parse, SYNTH_VOCAB))
