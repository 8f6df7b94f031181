"""Independent checks of a generated sample against its plan.

Each check re-derives a property from the output (word quads, targets)
instead of trusting the bookkeeping that produced it.
"""

from __future__ import annotations

import math

import numpy as np

from .. import codec
from .plan import RenderPlan
from .render import SYNTH_VOCAB, Annotation, apply_homography, homography

TOLERANCE = 1.0


def _inside_convex(point, polygon, tol: float) -> bool:
    """True if ``point`` is within ``tol`` px of the clockwise convex ``polygon``."""
    x, y = point
    for k in range(len(polygon)):
        (x0, y0), (x1, y1) = polygon[k], polygon[(k + 1) % len(polygon)]
        ex, ey = x1 - x0, y1 - y0
        # signed distance to the right of the edge (inside for image-space clockwise)
        cross = ex * (y - y0) - ey * (x - x0)
        if cross < -tol * math.hypot(ex, ey):
            return False
    return True


def reading_order_key(plan: RenderPlan, quad) -> tuple:
    """Sort key of a word quad: region (top, left), line index, left edge."""
    h_inv = np.linalg.inv(homography(plan))
    pts = apply_homography(h_inv, quad)
    cx, cy = pts.mean(axis=0)
    for region in plan.regions:
        x0, y0, x1, y1 = region.box
        if x0 <= cx <= x1 and y0 <= cy <= y1:
            line = math.floor((cy - y0) / region.line_height)
            return (y0, x0, line, float(pts[:, 0].min()))
    return (math.inf, math.inf, 0, float(cx))


def audit_sample(plan: RenderPlan, annotation: Annotation,
                 image_size: tuple[int, int] | None = None) -> list[str]:
    """Problems found in one sample; empty when it is sound."""
    problems = []
    w, h = image_size or plan.canvas
    dw, dh = plan.doc_size
    words = annotation.words

    if not words:
        problems.append("no words")
    if any(not wr.text or " " in wr.text for wr in words):
        problems.append("empty word or word containing a space")
    if annotation.text.split(" ") != [wr.text for wr in words]:
        problems.append("word texts do not match the reading-order text")

    keys = [reading_order_key(plan, wr.quad) for wr in words]
    if sorted(range(len(keys)), key=keys.__getitem__) != list(range(len(keys))):
        problems.append("stored order differs from the order re-derived from quads")
    if any(k[0] == math.inf for k in keys):
        problems.append("a word lies outside every region")

    doc_quad = plan.quad
    for i, wr in enumerate(words):
        if any(not (0 <= x <= w and 0 <= y <= h) for x, y in wr.quad):
            problems.append(f"word {i} leaves the image")
        if any(not _inside_convex(p, doc_quad, TOLERANCE) for p in wr.quad):
            problems.append(f"word {i} leaves the document quad")

    boxes = [r.box for r in plan.regions]
    for i, (ax0, ay0, ax1, ay1) in enumerate(boxes):
        if ax0 < 0 or ay0 < 0 or ax1 > dw or ay1 > dh:
            problems.append(f"region {i} leaves the document")
        for j in range(i + 1, len(boxes)):
            bx0, by0, bx1, by1 = boxes[j]
            if max(0, min(ax1, bx1) - max(ax0, bx0)) * max(0, min(ay1, by1) - max(ay0, by0)):
                problems.append(f"regions {i} and {j} overlap")

    if annotation.target != codec.encode(annotation.gt_parse, SYNTH_VOCAB):
        problems.append("target is not the encoding of gt_parse")
    tree, events = codec.decode(annotation.target, SYNTH_VOCAB)
    if events or not codec.trees_identical(tree, annotation.gt_parse):
        problems.append("target does not decode back to gt_parse")
    return problems
