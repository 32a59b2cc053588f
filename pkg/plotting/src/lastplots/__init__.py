"""Figure pipeline for lastsim sweep CSV outputs."""

from .figures import KINDS, FigureSpec, render, sidecar_path
from .reader import SchemaError

__all__ = ["KINDS", "FigureSpec", "render", "sidecar_path", "SchemaError"]
__version__ = "0.1.0"
