"""Batch generation: plan, render and hand each sample to a sink."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..errors import DocforgeError, IndexedGenerationError
from .config import GenConfig
from .plan import plan
from .render import Annotation, render
from .resources import Resources, resources_for


class Sink(Protocol):
    def write(self, index: int, image: np.ndarray, annotation: Annotation) -> None: ...


@dataclass(frozen=True)
class Summary:
    images: int
    words: int


def sample(config: GenConfig, index: int, resources: Resources | None = None):
    """Image and annotation of sample ``index``."""
    res = resources if resources is not None else resources_for(config)
    return render(plan(config, index, res), res)


def default_workers() -> int:
    return os.cpu_count() or 1


def generate(config: GenConfig, count: int, sink: Sink, workers: int | None = None,
             resources: Resources | None = None) -> Summary:
    """Produce samples ``0..count-1`` into ``sink``.

    Samples are independent, so ``workers`` threads may run them in any
    order; the output depends only on ``config`` and the index. A failure
    is re-raised as :class:`IndexedGenerationError` naming its index.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    res = resources if resources is not None else resources_for(config)
    workers = workers or default_workers()

    def one(index: int) -> int:
        try:
            image, annotation = sample(config, index, res)
            sink.write(index, image, annotation)
        except (DocforgeError, OSError, ValueError) as exc:
            raise IndexedGenerationError(index, exc) from exc
        return len(annotation.words)

    if workers == 1 or count <= 1:
        words = sum(one(i) for i in range(count))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            words = sum(pool.map(one, range(count)))
    return Summary(count, words)
