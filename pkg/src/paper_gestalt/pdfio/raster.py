"""Content-stream interpreter that rasterizes PDF pages to RGB arrays.

This is deliberately a *layout* renderer, not a full imaging model: vector
paths, images and block colors render faithfully; text renders as greeked
bars with correct metrics (glyph outlines are never drawn). For page-grid
thumbnails that gets the visual texture of a document right while staying
dependency-free and bit-deterministic. Known approximations: clip paths
are reduced to their bounding box, shadings fill their clip with gray,
and blend modes / soft masks are ignored.
"""

from __future__ import annotations

import io
import math

import numpy as np
from PIL import Image

from ..errors import CorruptPdf, RasterizationFailure
from .fonts import FontInfo, font_info
from .objects import Name, PdfStream
from .reader import Lexer, PdfDocument, PdfPage

# Affine matrices are (a, b, c, d, e, f): (x, y) -> (a x + c y + e, b x + d y + f).
IDENTITY = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)

GLYPH_HEIGHT = 0.62   # em; height of a greeked glyph box above the baseline
GLYPH_WIDTH = 0.92    # fraction of the advance the box covers
MAX_FORM_DEPTH = 10


def mat_mul(m, n):
    """Compose: apply `m` first, then `n`."""
    a1, b1, c1, d1, e1, f1 = m
    a2, b2, c2, d2, e2, f2 = n
    return (
        a1 * a2 + b1 * c2,
        a1 * b2 + b1 * d2,
        c1 * a2 + d1 * c2,
        c1 * b2 + d1 * d2,
        e1 * a2 + f1 * c2 + e2,
        e1 * b2 + f1 * d2 + f2,
    )


def mat_apply(m, x, y):
    a, b, c, d, e, f = m
    return (a * x + c * y + e, b * x + d * y + f)


def translation(tx, ty):
    return (1.0, 0.0, 0.0, 1.0, tx, ty)


def mat_scale_factor(m) -> float:
    """Isotropic magnitude of an affine map, used for line widths."""
    a, b, c, d, _, _ = m
    det = abs(a * d - b * c)
    return math.sqrt(det) if det > 0 else max(abs(a), abs(b), abs(c), abs(d), 1e-6)


def is_axis_aligned(m) -> bool:
    return abs(m[1]) < 1e-9 and abs(m[2]) < 1e-9


class Canvas:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.pixels = np.full((height, width, 3), 255, dtype=np.uint8)

    def _color_u8(self, color):
        return np.array([max(0, min(255, int(round(ch * 255)))) for ch in color], dtype=np.uint8)

    def fill_axis_rect(self, x0, y0, x1, y1, color, clip):
        x0, x1 = min(x0, x1), max(x0, x1)
        y0, y1 = min(y0, y1), max(y0, y1)
        x0 = max(x0, clip[0], 0.0)
        y0 = max(y0, clip[1], 0.0)
        x1 = min(x1, clip[2], float(self.width))
        y1 = min(y1, clip[3], float(self.height))
        if x1 <= x0 or y1 <= y0:
            return
        # A pixel is covered when its center lies inside the rectangle.
        ix0 = int(math.ceil(x0 - 0.5))
        ix1 = int(math.ceil(x1 - 0.5))
        iy0 = int(math.ceil(y0 - 0.5))
        iy1 = int(math.ceil(y1 - 0.5))
        # Thin features must not vanish entirely.
        if ix1 <= ix0 and x1 - x0 > 0.05:
            ix1 = ix0 + 1
        if iy1 <= iy0 and y1 - y0 > 0.05:
            iy1 = iy0 + 1
        ix0, iy0 = max(ix0, 0), max(iy0, 0)
        ix1, iy1 = min(ix1, self.width), min(iy1, self.height)
        if ix1 > ix0 and iy1 > iy0:
            self.pixels[iy0:iy1, ix0:ix1] = self._color_u8(color)

    def fill_polygon(self, subpaths, color, even_odd, clip):
        """Scanline fill with nonzero or even-odd winding at pixel centers."""
        edges = []
        for pts in subpaths:
            if len(pts) < 2:
                continue
            closed = pts + [pts[0]] if pts[0] != pts[-1] else pts
            for (xa, ya), (xb, yb) in zip(closed[:-1], closed[1:]):
                if ya != yb:
                    edges.append((xa, ya, xb, yb))
        if not edges:
            return
        e = np.asarray(edges, dtype=np.float64)
        y_lo = max(float(min(e[:, 1].min(), e[:, 3].min())), clip[1], 0.0)
        y_hi = min(float(max(e[:, 1].max(), e[:, 3].max())), clip[3], float(self.height))
        row0 = max(int(math.floor(y_lo - 0.5)), 0)
        row1 = min(int(math.ceil(y_hi + 0.5)), self.height)
        if row1 <= row0:
            return
        x0e, y0e, x1e, y1e = e[:, 0], e[:, 1], e[:, 2], e[:, 3]
        color_u8 = self._color_u8(color)
        clip_x0 = max(clip[0], 0.0)
        clip_x1 = min(clip[2], float(self.width))
        for row in range(row0, row1):
            yc = row + 0.5
            hit = ((y0e <= yc) & (yc < y1e)) | ((y1e <= yc) & (yc < y0e))
            if not hit.any():
                continue
            t = (yc - y0e[hit]) / (y1e[hit] - y0e[hit])
            xs = x0e[hit] + t * (x1e[hit] - x0e[hit])
            if even_odd:
                order = np.sort(xs)
                spans = zip(order[0::2], order[1::2])
            else:
                direction = np.where(y1e[hit] > y0e[hit], 1, -1)
                idx = np.argsort(xs, kind="stable")
                xs_sorted = xs[idx]
                winding = np.cumsum(direction[idx])
                inside = winding != 0
                spans = [
                    (xs_sorted[i], xs_sorted[i + 1])
                    for i in range(len(xs_sorted) - 1)
                    if inside[i]
                ]
            for xa, xb in spans:
                xa = max(xa, clip_x0)
                xb = min(xb, clip_x1)
                if xb <= xa:
                    continue
                ca = int(math.ceil(xa - 0.5))
                cb = int(math.ceil(xb - 0.5))
                if cb <= ca and xb - xa > 0.05:
                    cb = ca + 1
                ca, cb = max(ca, 0), min(cb, self.width)
                if cb > ca:
                    self.pixels[row, ca:cb] = color_u8

    def draw_image(self, img: np.ndarray, ctm, clip):
        """Map an RGB image over the CTM's unit square (nearest-neighbour)."""
        corners = [mat_apply(ctm, u, v) for u, v in ((0, 0), (1, 0), (0, 1), (1, 1))]
        xs = [p[0] for p in corners]
        ys = [p[1] for p in corners]
        x0 = max(int(math.floor(max(min(xs), clip[0], 0.0))), 0)
        x1 = min(int(math.ceil(min(max(xs), clip[2], float(self.width)))), self.width)
        y0 = max(int(math.floor(max(min(ys), clip[1], 0.0))), 0)
        y1 = min(int(math.ceil(min(max(ys), clip[3], float(self.height)))), self.height)
        if x1 <= x0 or y1 <= y0:
            return
        a, b, c, d, e, f = ctm
        det = a * d - b * c
        if abs(det) < 1e-12:
            return
        ia, ib, ic, id_ = d / det, -b / det, -c / det, a / det
        px, py = np.meshgrid(
            np.arange(x0, x1, dtype=np.float64) + 0.5,
            np.arange(y0, y1, dtype=np.float64) + 0.5,
        )
        dx, dy = px - e, py - f
        u = ia * dx + ic * dy
        v = ib * dx + id_ * dy
        inside = (u >= 0.0) & (u < 1.0) & (v >= 0.0) & (v < 1.0)
        if not inside.any():
            return
        h, w = img.shape[:2]
        col = np.clip((u * w).astype(np.int64), 0, w - 1)
        row = np.clip(((1.0 - v) * h).astype(np.int64), 0, h - 1)
        region = self.pixels[y0:y1, x0:x1]
        if img.ndim == 2:
            img = np.stack([img] * 3, axis=-1)
        region[inside] = img[row[inside], col[inside]]

    def draw_stencil(self, mask: np.ndarray, ctm, color, clip):
        """Paint `color` wherever the 2-D boolean mask is set, mapped like an image."""
        corners = [mat_apply(ctm, u, v) for u, v in ((0, 0), (1, 0), (0, 1), (1, 1))]
        xs = [p[0] for p in corners]
        ys = [p[1] for p in corners]
        x0 = max(int(math.floor(max(min(xs), clip[0], 0.0))), 0)
        x1 = min(int(math.ceil(min(max(xs), clip[2], float(self.width)))), self.width)
        y0 = max(int(math.floor(max(min(ys), clip[1], 0.0))), 0)
        y1 = min(int(math.ceil(min(max(ys), clip[3], float(self.height)))), self.height)
        if x1 <= x0 or y1 <= y0:
            return
        a, b, c, d, e, f = ctm
        det = a * d - b * c
        if abs(det) < 1e-12:
            return
        ia, ib, ic, id_ = d / det, -b / det, -c / det, a / det
        px, py = np.meshgrid(
            np.arange(x0, x1, dtype=np.float64) + 0.5,
            np.arange(y0, y1, dtype=np.float64) + 0.5,
        )
        dx, dy = px - e, py - f
        u = ia * dx + ic * dy
        v = ib * dx + id_ * dy
        inside = (u >= 0.0) & (u < 1.0) & (v >= 0.0) & (v < 1.0)
        if not inside.any():
            return
        h, w = mask.shape
        col = np.clip((u * w).astype(np.int64), 0, w - 1)
        row = np.clip(((1.0 - v) * h).astype(np.int64), 0, h - 1)
        paint = inside & mask[row, col]
        self.pixels[y0:y1, x0:x1][paint] = self._color_u8(color)


class GraphicsState:
    __slots__ = (
        "ctm", "fill", "stroke", "line_width", "clip",
        "fill_comps", "stroke_comps",
        "font", "font_size", "char_spacing", "word_spacing",
        "hscale", "leading", "rise", "render_mode",
    )

    def __init__(self, ctm, clip):
        self.ctm = ctm
        self.fill = (0.0, 0.0, 0.0)
        self.stroke = (0.0, 0.0, 0.0)
        self.line_width = 1.0
        self.clip = clip
        self.fill_comps = 1
        self.stroke_comps = 1
        self.font: FontInfo | None = None
        self.font_size = 0.0
        self.char_spacing = 0.0
        self.word_spacing = 0.0
        self.hscale = 1.0
        self.leading = 0.0
        self.rise = 0.0
        self.render_mode = 0

    def copy(self) -> "GraphicsState":
        dup = GraphicsState(self.ctm, self.clip)
        for slot in self.__slots__:
            setattr(dup, slot, getattr(self, slot))
        return dup


def cmyk_to_rgb(c, m, y, k):
    return ((1 - c) * (1 - k), (1 - m) * (1 - k), (1 - y) * (1 - k))


class PageRasterizer:
    def __init__(self, page: PdfPage, dpi: int):
        self.page = page
        self.doc: PdfDocument = page.document
        self.dpi = dpi
        scale = dpi / 72.0
        w_pt, h_pt = page.width, page.height
        rotate = page.rotate
        if rotate in (90, 270):
            self.width = max(1, int(round(h_pt * scale)))
            self.height = max(1, int(round(w_pt * scale)))
        else:
            self.width = max(1, int(round(w_pt * scale)))
            self.height = max(1, int(round(h_pt * scale)))
        x0, y0, x1, y1 = page.media_box
        s = scale
        if rotate == 90:
            base = (0.0, s, s, 0.0, -y0 * s, -x0 * s)
        elif rotate == 180:
            base = (-s, 0.0, 0.0, s, x1 * s, -y0 * s)
        elif rotate == 270:
            base = (0.0, -s, -s, 0.0, y1 * s, x1 * s)
        else:
            base = (s, 0.0, 0.0, -s, -x0 * s, y1 * s)
        self.base_ctm = base
        self.canvas = Canvas(self.width, self.height)
        self._font_cache: dict[int, FontInfo] = {}

    def run(self) -> np.ndarray:
        state = GraphicsState(self.base_ctm, (0.0, 0.0, float(self.width), float(self.height)))
        try:
            content = self.page.content_bytes()
        except CorruptPdf:
            raise
        self._execute(content, self.page.resources, state, depth=0)
        return self.canvas.pixels

    # --- interpreter ------------------------------------------------------

    def _execute(self, content: bytes, resources: dict, state: GraphicsState, depth: int) -> None:
        resources = self.doc.resolve(resources) or {}
        lex = Lexer(content)
        operands: list = []
        stack: list[GraphicsState] = []
        path: list[list[tuple[float, float]]] = []
        current: list[tuple[float, float]] = []
        start_point = (0.0, 0.0)
        pending_clip: str | None = None
        tm = tlm = IDENTITY
        n = len(content)

        def flush_path():
            nonlocal path, current, pending_clip
            if current:
                path.append(current)
            if pending_clip is not None and path:
                xs = [p[0] for sub in path for p in sub]
                ys = [p[1] for sub in path for p in sub]
                state.clip = (
                    max(state.clip[0], min(xs)),
                    max(state.clip[1], min(ys)),
                    min(state.clip[2], max(xs)),
                    min(state.clip[3], max(ys)),
                )
                pending_clip = None
            path = []
            current = []

        def moveto(x, y):
            nonlocal current, start_point
            if current:
                path.append(current)
            start_point = mat_apply(state.ctm, x, y)
            current = [start_point]

        def lineto(x, y):
            current.append(mat_apply(state.ctm, x, y))

        def flatten_bezier(p1, p2, p3):
            """Append a flattened cubic from the current point (device coords)."""
            if not current:
                return
            p0 = current[-1]
            length = math.dist(p0, p1) + math.dist(p1, p2) + math.dist(p2, p3)
            steps = max(2, min(48, int(length / 3.0)))
            for i in range(1, steps + 1):
                t = i / steps
                u = 1 - t
                x = u**3 * p0[0] + 3 * u * u * t * p1[0] + 3 * u * t * t * p2[0] + t**3 * p3[0]
                y = u**3 * p0[1] + 3 * u * u * t * p1[1] + 3 * u * t * t * p2[1] + t**3 * p3[1]
                current.append((x, y))

        def curveto(x1, y1, x2, y2, x3, y3):
            flatten_bezier(
                mat_apply(state.ctm, x1, y1),
                mat_apply(state.ctm, x2, y2),
                mat_apply(state.ctm, x3, y3),
            )

        def fill_current(even_odd):
            if current:
                path.append(current.copy())
            _fill_device_path(self.canvas, path, state.fill, even_odd, state.clip)

        def stroke_current():
            if current:
                path.append(current.copy())
            lw = max(state.line_width * mat_scale_factor(state.ctm), 0.8)
            half = lw / 2.0
            for sub in path:
                pts = sub
                if len(pts) == 1:
                    x, y = pts[0]
                    self.canvas.fill_axis_rect(x - half, y - half, x + half, y + half,
                                               state.stroke, state.clip)
                for (xa, ya), (xb, yb) in zip(pts[:-1], pts[1:]):
                    dx, dy = xb - xa, yb - ya
                    seg = math.hypot(dx, dy)
                    if seg < 1e-9:
                        continue
                    nx, ny = -dy / seg * half, dx / seg * half
                    quad = [[(xa + nx, ya + ny), (xb + nx, yb + ny),
                             (xb - nx, yb - ny), (xa - nx, ya - ny)]]
                    _fill_device_path(self.canvas, quad, state.stroke, False, state.clip)

        def set_components(values, target):
            comps = [float(v) for v in values if isinstance(v, (int, float))]
            if len(comps) == 4:
                color = cmyk_to_rgb(*comps)
            elif len(comps) == 3:
                color = tuple(comps)
            elif len(comps) == 1:
                color = (comps[0],) * 3
            else:
                color = (0.5, 0.5, 0.5)  # patterns and exotic spaces
            color = tuple(min(1.0, max(0.0, ch)) for ch in color)
            if target == "fill":
                state.fill = color
            else:
                state.stroke = color

        while True:
            lex.skip_ws()
            if lex.pos >= n:
                break
            try:
                token = lex.read_token()
            except CorruptPdf:
                break
            if isinstance(token, Name) or not isinstance(token, str) \
                    or token in ("]", ">>", "{", "}"):
                operands.append(token)
                if len(operands) > 64:
                    operands = operands[-64:]
                continue

            op = token
            try:
                if op == "q":
                    stack.append(state.copy())
                elif op == "Q":
                    if stack:
                        new = stack.pop()
                        for slot in GraphicsState.__slots__:
                            setattr(state, slot, getattr(new, slot))
                elif op == "cm" and len(operands) >= 6:
                    state.ctm = mat_mul(tuple(float(v) for v in operands[-6:]), state.ctm)
                elif op == "w" and operands:
                    state.line_width = float(operands[-1])
                elif op == "gs":
                    self._apply_ext_gstate(operands, resources, state)
                elif op == "m" and len(operands) >= 2:
                    moveto(float(operands[-2]), float(operands[-1]))
                elif op == "l" and len(operands) >= 2:
                    if current:
                        lineto(float(operands[-2]), float(operands[-1]))
                    else:
                        moveto(float(operands[-2]), float(operands[-1]))
                elif op == "c" and len(operands) >= 6:
                    curveto(*(float(v) for v in operands[-6:]))
                elif op == "v" and len(operands) >= 4:
                    if current:
                        a, b, c2, d = (float(v) for v in operands[-4:])
                        p2 = mat_apply(state.ctm, a, b)
                        p3 = mat_apply(state.ctm, c2, d)
                        flatten_bezier(current[-1], p2, p3)
                elif op == "y" and len(operands) >= 4:
                    if current:
                        a, b, c2, d = (float(v) for v in operands[-4:])
                        p1 = mat_apply(state.ctm, a, b)
                        p3 = mat_apply(state.ctm, c2, d)
                        flatten_bezier(p1, p3, p3)
                elif op == "h":
                    if current:
                        current.append(current[0])
                elif op == "re" and len(operands) >= 4:
                    x, y, w, h = (float(v) for v in operands[-4:])
                    if current:
                        path.append(current)
                        current = []
                    corners = [
                        mat_apply(state.ctm, x, y),
                        mat_apply(state.ctm, x + w, y),
                        mat_apply(state.ctm, x + w, y + h),
                        mat_apply(state.ctm, x, y + h),
                    ]
                    path.append(corners + [corners[0]])
                elif op in ("f", "F", "f*"):
                    fill_current(op == "f*")
                    flush_path()
                elif op in ("B", "B*", "b", "b*"):
                    if op in ("b", "b*") and current:
                        current.append(current[0])
                    fill_current(op in ("B*", "b*"))
                    stroke_current()
                    flush_path()
                elif op in ("S", "s"):
                    if op == "s" and current:
                        current.append(current[0])
                    stroke_current()
                    flush_path()
                elif op == "n":
                    flush_path()
                elif op in ("W", "W*"):
                    pending_clip = op
                elif op == "g" and operands:
                    v = min(1.0, max(0.0, float(operands[-1])))
                    state.fill = (v, v, v)
                elif op == "G" and operands:
                    v = min(1.0, max(0.0, float(operands[-1])))
                    state.stroke = (v, v, v)
                elif op == "rg" and len(operands) >= 3:
                    state.fill = tuple(min(1.0, max(0.0, float(v))) for v in operands[-3:])
                elif op == "RG" and len(operands) >= 3:
                    state.stroke = tuple(min(1.0, max(0.0, float(v))) for v in operands[-3:])
                elif op == "k" and len(operands) >= 4:
                    state.fill = cmyk_to_rgb(*(float(v) for v in operands[-4:]))
                elif op == "K" and len(operands) >= 4:
                    state.stroke = cmyk_to_rgb(*(float(v) for v in operands[-4:]))
                elif op in ("cs", "CS"):
                    pass  # component count is inferred at sc/scn time
                elif op in ("sc", "scn"):
                    set_components(operands, "fill")
                elif op in ("SC", "SCN"):
                    set_components(operands, "stroke")
                elif op == "BT":
                    tm = tlm = IDENTITY
                elif op == "ET":
                    pass
                elif op == "Tf" and len(operands) >= 2:
                    state.font = self._lookup_font(operands[-2], resources)
                    state.font_size = float(operands[-1])
                elif op == "Tc" and operands:
                    state.char_spacing = float(operands[-1])
                elif op == "Tw" and operands:
                    state.word_spacing = float(operands[-1])
                elif op == "Tz" and operands:
                    state.hscale = float(operands[-1]) / 100.0
                elif op == "TL" and operands:
                    state.leading = float(operands[-1])
                elif op == "Ts" and operands:
                    state.rise = float(operands[-1])
                elif op == "Tr" and operands:
                    state.render_mode = int(operands[-1])
                elif op == "Td" and len(operands) >= 2:
                    tlm = mat_mul(translation(float(operands[-2]), float(operands[-1])), tlm)
                    tm = tlm
                elif op == "TD" and len(operands) >= 2:
                    state.leading = -float(operands[-1])
                    tlm = mat_mul(translation(float(operands[-2]), float(operands[-1])), tlm)
                    tm = tlm
                elif op == "Tm" and len(operands) >= 6:
                    tm = tlm = tuple(float(v) for v in operands[-6:])
                elif op == "T*":
                    tlm = mat_mul(translation(0.0, -state.leading), tlm)
                    tm = tlm
                elif op == "Tj" and operands:
                    tm = self._show_text(operands[-1], tm, state)
                elif op == "'" and operands:
                    tlm = mat_mul(translation(0.0, -state.leading), tlm)
                    tm = tlm
                    tm = self._show_text(operands[-1], tm, state)
                elif op == '"' and len(operands) >= 3:
                    state.word_spacing = float(operands[-3])
                    state.char_spacing = float(operands[-2])
                    tlm = mat_mul(translation(0.0, -state.leading), tlm)
                    tm = tlm
                    tm = self._show_text(operands[-1], tm, state)
                elif op == "TJ" and operands and isinstance(operands[-1], list):
                    for item in operands[-1]:
                        if isinstance(item, bytes):
                            tm = self._show_text(item, tm, state)
                        elif isinstance(item, (int, float)):
                            shift = -item / 1000.0 * state.font_size * state.hscale
                            tm = mat_mul(translation(shift, 0.0), tm)
                elif op == "Do" and operands:
                    self._do_xobject(operands[-1], resources, state, depth)
                elif op == "sh":
                    cl = state.clip
                    self.canvas.fill_axis_rect(cl[0], cl[1], cl[2], cl[3], (0.5, 0.5, 0.5), cl)
                elif op == "BI":
                    lex.pos = self._inline_image(lex, state)
                # BMC/BDC/EMC/MP/DP/ri/i/j/J/M/d and unknown operators: no-op.
            except (ValueError, TypeError, IndexError, ZeroDivisionError):
                pass
            operands = []

    # --- text -------------------------------------------------------------

    def _lookup_font(self, name, resources) -> FontInfo:
        fonts = self.doc.resolve(resources.get("Font")) or {}
        entry = fonts.get(str(name)) if isinstance(fonts, dict) else None
        key = id(entry)
        cached = self._font_cache.get(key)
        if cached is None:
            cached = font_info(entry, self.doc)
            self._font_cache[key] = cached
        return cached

    def _show_text(self, text, tm, state: GraphicsState):
        if not isinstance(text, bytes):
            return tm
        font = state.font or FontInfo({}, 0.5, 1)
        size = state.font_size
        invisible = state.render_mode in (3, 7) or size == 0
        for code in font.iter_codes(text):
            gw = font.width(code)
            is_space = font.code_bytes == 1 and code == 0x20
            if not invisible and not is_space and gw > 0:
                trm = mat_mul(
                    (size * state.hscale, 0.0, 0.0, size, 0.0, state.rise),
                    mat_mul(tm, state.ctm),
                )
                corners = [
                    mat_apply(trm, 0.0, 0.0),
                    mat_apply(trm, gw * GLYPH_WIDTH, 0.0),
                    mat_apply(trm, gw * GLYPH_WIDTH, GLYPH_HEIGHT),
                    mat_apply(trm, 0.0, GLYPH_HEIGHT),
                ]
                if is_axis_aligned(trm):
                    xs = [p[0] for p in corners]
                    ys = [p[1] for p in corners]
                    self.canvas.fill_axis_rect(min(xs), min(ys), max(xs), max(ys),
                                               state.fill, state.clip)
                else:
                    self.canvas.fill_polygon([corners + [corners[0]]], state.fill,
                                             False, state.clip)
            advance = gw * size + state.char_spacing
            if is_space:
                advance += state.word_spacing
            tm = mat_mul(translation(advance * state.hscale, 0.0), tm)
        return tm

    # --- XObjects and images ------------------------------------------------

    def _do_xobject(self, name, resources, state: GraphicsState, depth: int) -> None:
        xobjects = self.doc.resolve(resources.get("XObject")) or {}
        if not isinstance(xobjects, dict):
            return
        xobj = self.doc.resolve(xobjects.get(str(name)))
        if not isinstance(xobj, PdfStream):
            return
        subtype = xobj.dict.get("Subtype")
        if subtype == Name("Image"):
            self._paint_image(xobj, state)
        elif subtype == Name("Form") and depth < MAX_FORM_DEPTH:
            inner = state.copy()
            matrix = self.doc.resolve(xobj.dict.get("Matrix"))
            if isinstance(matrix, list) and len(matrix) == 6:
                inner.ctm = mat_mul(tuple(float(self.doc.resolve(v)) for v in matrix), inner.ctm)
            bbox = self.doc.resolve(xobj.dict.get("BBox"))
            if isinstance(bbox, list) and len(bbox) == 4:
                pts = [mat_apply(inner.ctm, float(self.doc.resolve(bbox[i])),
                                 float(self.doc.resolve(bbox[j])))
                       for i, j in ((0, 1), (2, 1), (2, 3), (0, 3))]
                xs = [p[0] for p in pts]
                ys = [p[1] for p in pts]
                inner.clip = (
                    max(inner.clip[0], min(xs)), max(inner.clip[1], min(ys)),
                    min(inner.clip[2], max(xs)), min(inner.clip[3], max(ys)),
                )
            form_res = self.doc.resolve(xobj.dict.get("Resources")) or resources
            try:
                content = self.doc.stream_data(xobj)
            except CorruptPdf:
                return
            self._execute(content, form_res, inner, depth + 1)

    def _paint_image(self, xobj: PdfStream, state: GraphicsState) -> None:
        info = dict(xobj.dict)
        if self.doc.resolve(info.get("ImageMask")) is True:
            mask = decode_stencil_mask(xobj, self.doc)
            if mask is not None:
                self.canvas.draw_stencil(mask, state.ctm, state.fill, state.clip)
            return
        img = decode_image(xobj, self.doc)
        if img is None:
            # Unsupported codec: keep layout honest with a gray placeholder.
            corners = [mat_apply(state.ctm, u, v) for u, v in ((0, 0), (1, 0), (0, 1), (1, 1))]
            xs = [p[0] for p in corners]
            ys = [p[1] for p in corners]
            self.canvas.fill_axis_rect(min(xs), min(ys), max(xs), max(ys),
                                       (0.55, 0.55, 0.55), state.clip)
            return
        self.canvas.draw_image(img, state.ctm, state.clip)

    def _apply_ext_gstate(self, operands, resources, state: GraphicsState) -> None:
        if not operands:
            return
        ext = self.doc.resolve(resources.get("ExtGState")) or {}
        entry = self.doc.resolve(ext.get(str(operands[-1]))) if isinstance(ext, dict) else None
        if isinstance(entry, dict):
            lw = self.doc.resolve(entry.get("LW"))
            if isinstance(lw, (int, float)):
                state.line_width = float(lw)

    def _inline_image(self, lex: Lexer, state: GraphicsState) -> int:
        """Parse BI..ID..EI; paint if decodable, else a gray box. Returns new pos."""
        params: dict = {}
        while True:
            lex.skip_ws()
            if lex.pos >= len(lex.data):
                return lex.pos
            token = lex.read_token()
            if token == "ID":
                break
            value = lex.read_token() if isinstance(token, Name) else None
            if isinstance(token, Name):
                params[str(token)] = value
        data_start = lex.pos + 1  # single whitespace after ID
        pos = data_start
        data = lex.data
        n = len(data)
        while pos < n - 1:
            if data[pos:pos + 2] == b"EI" and (pos == 0 or data[pos - 1] in b"\x00\t\n\x0c\r ") \
                    and (pos + 2 >= n or not (0x21 <= data[pos + 2] <= 0x7E) or data[pos + 2] in b"()<>[]{}/%"):
                break
            pos += 1
        payload = data[data_start:pos]
        try:
            img = decode_inline_image(params, payload, self.doc)
            if img is not None:
                self.canvas.draw_image(img, state.ctm, state.clip)
        except (CorruptPdf, ValueError, TypeError):
            pass
        return min(pos + 2, n)


def _fill_device_path(canvas: Canvas, subpaths, color, even_odd, clip) -> None:
    cleaned = [sub for sub in subpaths if len(sub) >= 3]
    if not cleaned:
        return
    if len(cleaned) == 1 and _axis_rect(cleaned[0]) is not None:
        x0, y0, x1, y1 = _axis_rect(cleaned[0])
        canvas.fill_axis_rect(x0, y0, x1, y1, color, clip)
        return
    canvas.fill_polygon(cleaned, color, even_odd, clip)


def _axis_rect(points):
    """Return (x0, y0, x1, y1) when the subpath is an axis-aligned rectangle."""
    pts = points[:-1] if len(points) >= 2 and points[0] == points[-1] else points
    if len(pts) != 4:
        return None
    xs = sorted({round(p[0], 6) for p in pts})
    ys = sorted({round(p[1], 6) for p in pts})
    if len(xs) != 2 or len(ys) != 2:
        return None
    expected = {(xs[0], ys[0]), (xs[0], ys[1]), (xs[1], ys[0]), (xs[1], ys[1])}
    got = {(round(p[0], 6), round(p[1], 6)) for p in pts}
    if got != expected:
        return None
    return xs[0], ys[0], xs[1], ys[1]


# --- image decoding ---------------------------------------------------------

_CS_ABBREV = {"G": "DeviceGray", "RGB": "DeviceRGB", "CMYK": "DeviceCMYK", "I": "Indexed"}


def _colorspace_components(cs, doc) -> tuple[str, object]:
    """Normalize a colorspace entry to (kind, payload)."""
    cs = doc.resolve(cs)
    if isinstance(cs, Name) or isinstance(cs, str):
        name = _CS_ABBREV.get(str(cs), str(cs))
        return name, None
    if isinstance(cs, list) and cs:
        head = str(doc.resolve(cs[0]))
        head = _CS_ABBREV.get(head, head)
        if head == "Indexed" and len(cs) >= 4:
            base_kind, _ = _colorspace_components(cs[1], doc)
            lookup = doc.resolve(cs[3])
            if isinstance(lookup, PdfStream):
                lookup = doc.stream_data(lookup)
            return "Indexed", (base_kind, int(doc.resolve(cs[2])), lookup)
        if head == "ICCBased" and len(cs) >= 2:
            stream = doc.resolve(cs[1])
            ncomp = 3
            if isinstance(stream, PdfStream):
                ncomp = int(doc.resolve(stream.dict.get("N", 3)) or 3)
            return {1: "DeviceGray", 4: "DeviceCMYK"}.get(ncomp, "DeviceRGB"), None
        if head in ("CalRGB", "Lab"):
            return "DeviceRGB", None
        if head == "CalGray":
            return "DeviceGray", None
        if head in ("Separation", "DeviceN"):
            return "DeviceGray", None
    return "DeviceGray", None


def _unpack_samples(raw: bytes, width: int, height: int, ncomp: int, bpc: int) -> np.ndarray:
    """Rows are padded to byte boundaries; returns (h, w, ncomp) float in [0,1]."""
    rowbits = width * ncomp * bpc
    rowbytes = (rowbits + 7) // 8
    need = rowbytes * height
    if len(raw) < need:
        raw = raw + b"\x00" * (need - len(raw))
    buf = np.frombuffer(raw[:need], dtype=np.uint8).reshape(height, rowbytes)
    if bpc == 8:
        samples = buf[:, : width * ncomp].astype(np.float64) / 255.0
    elif bpc == 16:
        wide = buf[:, : width * ncomp * 2].reshape(height, width * ncomp, 2)
        samples = (wide[..., 0].astype(np.float64) * 256 + wide[..., 1]) / 65535.0
        samples = samples.reshape(height, width * ncomp)
    else:
        bits = np.unpackbits(buf, axis=1)[:, :rowbits]
        group = bits.reshape(height, width * ncomp, bpc)
        weights = (1 << np.arange(bpc - 1, -1, -1)).astype(np.uint32)
        values = (group * weights).sum(axis=2).astype(np.float64)
        samples = values / float((1 << bpc) - 1)
    return samples.reshape(height, width, ncomp)


def decode_image(xobj: PdfStream, doc) -> np.ndarray | None:
    """Decode an image XObject to an RGB uint8 array, or None if unsupported."""
    d = xobj.dict
    width = int(doc.resolve(d.get("Width", 0)) or 0)
    height = int(doc.resolve(d.get("Height", 0)) or 0)
    if width <= 0 or height <= 0:
        return None
    filters = doc.resolve(d.get("Filter"))
    if isinstance(filters, list):
        names = [str(doc.resolve(f)) for f in filters]
    elif filters is not None:
        names = [str(filters)]
    else:
        names = []
    if any(nm in ("DCTDecode", "DCT") for nm in names):
        try:
            pil = Image.open(io.BytesIO(doc.stream_data(xobj)))
            return np.asarray(pil.convert("RGB"))
        except Exception:
            return None
    if any(nm in ("JPXDecode", "CCITTFaxDecode", "CCF", "JBIG2Decode") for nm in names):
        return None
    try:
        raw = doc.stream_data(xobj)
    except CorruptPdf:
        return None
    bpc = int(doc.resolve(d.get("BitsPerComponent", 8)) or 8)
    kind, payload = _colorspace_components(d.get("ColorSpace"), doc)
    decode = doc.resolve(d.get("Decode"))

    if kind == "Indexed":
        base_kind, hival, lookup = payload
        idx = _unpack_samples(raw, width, height, 1, bpc)[..., 0]
        idx = np.clip((idx * ((1 << bpc) - 1)).round().astype(np.int64), 0, max(hival, 0))
        if not isinstance(lookup, (bytes, bytearray)):
            return None
        ncomp = {"DeviceGray": 1, "DeviceRGB": 3, "DeviceCMYK": 4}.get(base_kind, 3)
        table = np.frombuffer(bytes(lookup), dtype=np.uint8)
        rows = len(table) // ncomp
        if rows == 0:
            return None
        table = table[: rows * ncomp].reshape(rows, ncomp).astype(np.float64) / 255.0
        idx = np.clip(idx, 0, rows - 1)
        comp = table[idx]
        return _components_to_rgb(comp, base_kind)

    ncomp = {"DeviceGray": 1, "DeviceRGB": 3, "DeviceCMYK": 4}.get(kind, 1)
    samples = _unpack_samples(raw, width, height, ncomp, bpc)
    if isinstance(decode, list) and len(decode) == 2 * ncomp:
        lo = np.array([float(doc.resolve(v)) for v in decode[0::2]])
        hi = np.array([float(doc.resolve(v)) for v in decode[1::2]])
        samples = lo + samples * (hi - lo)
    return _components_to_rgb(samples, kind)


def _components_to_rgb(samples: np.ndarray, kind: str) -> np.ndarray:
    if kind == "DeviceCMYK":
        c, m, y, k = (samples[..., i] for i in range(4))
        rgb = np.stack([(1 - c) * (1 - k), (1 - m) * (1 - k), (1 - y) * (1 - k)], axis=-1)
    elif samples.shape[-1] == 1:
        rgb = np.repeat(samples, 3, axis=-1)
    else:
        rgb = samples[..., :3]
    return np.clip(rgb * 255.0, 0, 255).round().astype(np.uint8)


def decode_stencil_mask(xobj: PdfStream, doc) -> np.ndarray | None:
    d = xobj.dict
    width = int(doc.resolve(d.get("Width", 0)) or 0)
    height = int(doc.resolve(d.get("Height", 0)) or 0)
    if width <= 0 or height <= 0:
        return None
    try:
        raw = doc.stream_data(xobj)
    except CorruptPdf:
        return None
    samples = _unpack_samples(raw, width, height, 1, 1)[..., 0]
    decode = doc.resolve(d.get("Decode"))
    invert = isinstance(decode, list) and decode and float(doc.resolve(decode[0])) == 1
    mask = samples < 0.5 if not invert else samples >= 0.5
    return mask


def decode_inline_image(params: dict, payload: bytes, doc) -> np.ndarray | None:
    mapped = {
        "Width": params.get("W", params.get("Width")),
        "Height": params.get("H", params.get("Height")),
        "BitsPerComponent": params.get("BPC", params.get("BitsPerComponent", 8)),
        "ColorSpace": params.get("CS", params.get("ColorSpace")),
        "Filter": params.get("F", params.get("Filter")),
        "DecodeParms": params.get("DP", params.get("DecodeParms")),
        "Decode": params.get("D", params.get("Decode")),
    }
    stream = PdfStream(mapped, payload)
    return decode_image(stream, doc)


def rasterize_page(page: PdfPage, dpi: int) -> np.ndarray:
    """Render one page to an (H, W, 3) uint8 array."""
    try:
        return PageRasterizer(page, dpi).run()
    except CorruptPdf:
        raise
    except MemoryError:
        raise
    except Exception as exc:  # interpreter bugs must not crash a whole build
        raise RasterizationFailure(f"page failed to rasterize: {exc}") from exc
