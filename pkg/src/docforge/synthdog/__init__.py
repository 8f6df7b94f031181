"""Seeded synthetic document images with reading-order ground truth."""

from .config import GenConfig, load_config, parse_override
from .generate import Summary, generate, sample
from .plan import RenderPlan, plan, sample_seed
from .render import SYNTH_VOCAB, Annotation, WordRecord, render
from .resources import Resources, build_resources, resources_for

__all__ = [
    "SYNTH_VOCAB", "Annotation", "GenConfig", "RenderPlan", "Resources", "Summary",
    "WordRecord", "build_resources", "generate", "load_config", "parse_override", "plan",
    "render", "resources_for", "sample", "sample_seed",
]
