"""Rasterization backends.

The builtin backend (reader + interpreter in this package) is always
available and fully deterministic. When the poppler `pdftoppm` binary is
on PATH it is preferred for real proceedings PDFs, whose embedded fonts
the builtin renderer only greeks. Select explicitly with the
PAPER_GESTALT_PDF_BACKEND environment variable ("builtin" | "pdftoppm").
"""

from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import CorruptPdf, RasterizationFailure
from .raster import rasterize_page
from .reader import PdfDocument

ENV_BACKEND = "PAPER_GESTALT_PDF_BACKEND"


class BuiltinBackend:
    """Pure-Python rasterizer; greeked text, exact vector/image layout."""

    name = "builtin"

    def page_count(self, pdf_path: str | Path) -> int:
        return PdfDocument.open(pdf_path).page_count

    def render_pages(self, pdf_path: str | Path, dpi: int,
                     max_pages: int | None = None) -> list[np.ndarray]:
        doc = PdfDocument.open(pdf_path)
        pages = doc.pages if max_pages is None else doc.pages[:max_pages]
        return [rasterize_page(page, dpi) for page in pages]


class PdftoppmBackend:
    """Shells out to poppler's pdftoppm, the converter classically used
    for paper-page thumbnailing pipelines."""

    name = "pdftoppm"

    def __init__(self, binary: str = "pdftoppm"):
        self.binary = binary

    def page_count(self, pdf_path: str | Path) -> int:
        # Poppler ships pdfinfo alongside pdftoppm; fall back to the
        # builtin parser when it is missing.
        pdfinfo = shutil.which("pdfinfo")
        if pdfinfo:
            try:
                out = subprocess.run(
                    [pdfinfo, str(pdf_path)], capture_output=True, text=True,
                    timeout=120, check=True,
                ).stdout
                for line in out.splitlines():
                    if line.startswith("Pages:"):
                        return int(line.split(":", 1)[1].strip())
            except (subprocess.SubprocessError, ValueError):
                pass
        return PdfDocument.open(pdf_path).page_count

    def render_pages(self, pdf_path: str | Path, dpi: int,
                     max_pages: int | None = None) -> list[np.ndarray]:
        with tempfile.TemporaryDirectory(prefix="pg_ppm_") as tmp:
            prefix = os.path.join(tmp, "page")
            cmd = [self.binary, "-png", "-r", str(dpi)]
            if max_pages is not None:
                cmd += ["-f", "1", "-l", str(max_pages)]
            cmd += [str(pdf_path), prefix]
            try:
                subprocess.run(cmd, capture_output=True, timeout=600, check=True)
            except subprocess.CalledProcessError as exc:
                stderr = exc.stderr.decode("utf-8", "replace") if exc.stderr else ""
                raise RasterizationFailure(f"pdftoppm failed: {stderr.strip()}") from exc
            except subprocess.SubprocessError as exc:
                raise RasterizationFailure(f"pdftoppm failed: {exc}") from exc
            files = sorted(Path(tmp).glob("page-*.png"))
            if not files:
                raise CorruptPdf(f"pdftoppm produced no pages for {pdf_path}")
            return [np.asarray(Image.open(f).convert("RGB")) for f in files]


def resolve_backend(name: str | None = None):
    """Pick a backend: explicit name > env var > pdftoppm-if-present > builtin."""
    name = name or os.environ.get(ENV_BACKEND) or "auto"
    if name == "builtin":
        return BuiltinBackend()
    if name == "pdftoppm":
        return PdftoppmBackend()
    if name == "auto":
        if shutil.which("pdftoppm"):
            return PdftoppmBackend()
        return BuiltinBackend()
    raise ValueError(f"unknown PDF backend {name!r}")
