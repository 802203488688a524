"""Offline figure rendering for spongebc CSV artifacts."""

from .reader import SchemaError, read_csv
from .render import FIGURE_KINDS, render

__all__ = ["FIGURE_KINDS", "SchemaError", "read_csv", "render"]

__version__ = "0.1.0"
