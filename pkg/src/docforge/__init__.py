"""Synthetic document generation, token-sequence codec and evaluation metrics."""

__version__ = "0.1.0"
