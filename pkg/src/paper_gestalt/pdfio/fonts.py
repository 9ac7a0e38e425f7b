"""Glyph advance widths for the rasterizer's text greeking.

The renderer never draws real glyph outlines; it only needs accurate
advances so greeked text occupies the same area the type would. Widths
come from the font's /Widths (or CID /W) arrays when embedded, and from
the standard-14 AFM metrics (via reportlab) otherwise.
"""

from __future__ import annotations

import re

from reportlab.pdfbase import pdfmetrics

from .objects import Name, PdfStream

_SUBSET_PREFIX = re.compile(r"^[A-Z]{6}\+")

_STANDARD_ALIASES = {
    "arial": "Helvetica",
    "arialmt": "Helvetica",
    "arial-bold": "Helvetica-Bold",
    "arial-boldmt": "Helvetica-Bold",
    "timesnewroman": "Times-Roman",
    "timesnewromanpsmt": "Times-Roman",
    "couriernew": "Courier",
}

_STANDARD_14 = {
    "Helvetica", "Helvetica-Bold", "Helvetica-Oblique", "Helvetica-BoldOblique",
    "Times-Roman", "Times-Bold", "Times-Italic", "Times-BoldItalic",
    "Courier", "Courier-Bold", "Courier-Oblique", "Courier-BoldOblique",
    "Symbol", "ZapfDingbats",
}

DEFAULT_WIDTH = 0.5  # em, used when a font gives us nothing at all


class FontInfo:
    """Advance-width lookup for one font resource."""

    def __init__(self, widths: dict[int, float], default: float, code_bytes: int,
                 space_code: int | None = 32):
        self.widths = widths          # code -> width in em (text space / 1000)
        self.default = default
        self.code_bytes = code_bytes  # 1 for simple fonts, 2 for CID fonts
        self.space_code = space_code

    def width(self, code: int) -> float:
        return self.widths.get(code, self.default)

    def iter_codes(self, text: bytes):
        if self.code_bytes == 1:
            yield from text
        else:
            for i in range(0, len(text) - 1, 2):
                yield (text[i] << 8) | text[i + 1]


def _std14_name(base_font: str) -> str | None:
    name = _SUBSET_PREFIX.sub("", base_font or "")
    if name in _STANDARD_14:
        return name
    alias = _STANDARD_ALIASES.get(name.replace(" ", "").lower())
    if alias:
        return alias
    # Family-style heuristics keep greeking plausible for common system fonts.
    lowered = name.lower()
    if "courier" in lowered or "mono" in lowered:
        family = "Courier"
    elif "times" in lowered or "serif" in lowered or "roman" in lowered:
        family = "Times"
    elif "helvetica" in lowered or "arial" in lowered or "sans" in lowered:
        family = "Helvetica"
    else:
        return None
    bold = "bold" in lowered
    italic = "italic" in lowered or "oblique" in lowered
    if family == "Times":
        if bold and italic:
            return "Times-BoldItalic"
        if bold:
            return "Times-Bold"
        if italic:
            return "Times-Italic"
        return "Times-Roman"
    suffix = ""
    if bold and italic:
        suffix = "-BoldOblique"
    elif bold:
        suffix = "-Bold"
    elif italic:
        suffix = "-Oblique"
    return family + suffix


def _std14_widths(name: str) -> dict[int, float]:
    font = pdfmetrics.getFont(name)
    return {code: w / 1000.0 for code, w in enumerate(font.widths) if w}


def font_info(font_dict, document) -> FontInfo:
    """Build a FontInfo from a /Font resource dictionary."""
    font_dict = document.resolve(font_dict)
    if isinstance(font_dict, PdfStream):
        font_dict = font_dict.dict
    if not isinstance(font_dict, dict):
        return FontInfo({}, DEFAULT_WIDTH, 1)

    subtype = font_dict.get("Subtype")
    base_font = str(document.resolve(font_dict.get("BaseFont", "")) or "")

    if subtype == Name("Type0"):
        return _cid_font_info(font_dict, document)

    widths: dict[int, float] = {}
    std = _std14_name(base_font)
    if std:
        widths.update(_std14_widths(std))
    default = DEFAULT_WIDTH
    descriptor = document.resolve(font_dict.get("FontDescriptor"))
    if isinstance(descriptor, dict):
        missing = document.resolve(descriptor.get("MissingWidth"))
        if isinstance(missing, (int, float)) and missing > 0:
            default = float(missing) / 1000.0

    width_array = document.resolve(font_dict.get("Widths"))
    first_char = document.resolve(font_dict.get("FirstChar", 0)) or 0
    if isinstance(width_array, list):
        for offset, w in enumerate(width_array):
            w = document.resolve(w)
            if isinstance(w, (int, float)) and w > 0:
                widths[int(first_char) + offset] = float(w) / 1000.0
    if not widths:
        widths = _std14_widths("Helvetica")
    return FontInfo(widths, default, 1)


def _cid_font_info(font_dict: dict, document) -> FontInfo:
    descendants = document.resolve(font_dict.get("DescendantFonts"))
    desc = None
    if isinstance(descendants, list) and descendants:
        desc = document.resolve(descendants[0])
    default = 1.0
    widths: dict[int, float] = {}
    if isinstance(desc, dict):
        dw = document.resolve(desc.get("DW"))
        if isinstance(dw, (int, float)) and dw > 0:
            default = float(dw) / 1000.0
        w_array = document.resolve(desc.get("W"))
        if isinstance(w_array, list):
            _parse_cid_widths(w_array, widths, document)
    # Codes are assumed to equal CIDs (Identity encoding), which holds for
    # the CID fonts LaTeX/word processors embed in practice.
    return FontInfo(widths, default, 2, space_code=None)


def _parse_cid_widths(w_array: list, widths: dict[int, float], document) -> None:
    i = 0
    n = len(w_array)
    while i < n:
        first = document.resolve(w_array[i])
        if not isinstance(first, (int, float)):
            i += 1
            continue
        if i + 1 < n and isinstance(document.resolve(w_array[i + 1]), list):
            run = document.resolve(w_array[i + 1])
            for offset, w in enumerate(run):
                w = document.resolve(w)
                if isinstance(w, (int, float)):
                    widths[int(first) + offset] = float(w) / 1000.0
            i += 2
        elif i + 2 < n:
            last = document.resolve(w_array[i + 1])
            w = document.resolve(w_array[i + 2])
            if isinstance(last, (int, float)) and isinstance(w, (int, float)):
                for cid in range(int(first), int(last) + 1):
                    widths[cid] = float(w) / 1000.0
            i += 3
        else:
            break
