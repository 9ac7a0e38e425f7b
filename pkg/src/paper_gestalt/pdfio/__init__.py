"""Self-contained PDF reading and page rasterization."""

from .backend import BuiltinBackend, PdftoppmBackend, resolve_backend
from .raster import rasterize_page
from .reader import PdfDocument

__all__ = [
    "BuiltinBackend",
    "PdftoppmBackend",
    "PdfDocument",
    "rasterize_page",
    "resolve_backend",
]
