"""Minimal PDF reader: tokenizer, object scanner and page-tree walk.

The loader does not trust cross-reference tables: it scans the file for
`N G obj` markers and parses every top-level object, then expands object
streams. That mirrors the "repair mode" of mainstream PDF tools and copes
with incremental updates and mildly damaged files. Later definitions of
the same object number win, matching incremental-update semantics.
"""

from __future__ import annotations

import re
from pathlib import Path

from ..errors import CorruptPdf
from .filters import apply_filters
from .objects import Name, PdfStream, Ref, is_delimiter, is_regular, is_whitespace

_OBJ_RE = re.compile(rb"(\d{1,10})\s+(\d{1,5})\s+obj\b")
_TRAILER_RE = re.compile(rb"trailer\b")
_NUMBER_RE = re.compile(rb"[+-]?(\d+\.?\d*|\.\d+)")


class Lexer:
    """Token-level reader over a bytes buffer."""

    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def skip_ws(self) -> None:
        data, n = self.data, len(self.data)
        pos = self.pos
        while pos < n:
            c = data[pos]
            if is_whitespace(c):
                pos += 1
            elif c == 0x25:  # '%' comment to end of line
                while pos < n and data[pos] not in b"\r\n":
                    pos += 1
            else:
                break
        self.pos = pos

    def peek_byte(self) -> int:
        return self.data[self.pos] if self.pos < len(self.data) else -1

    def read_token(self):
        """Return the next object-or-keyword token.

        Keywords (obj, endobj, R, true, ...) come back as Python str;
        everything else as parsed PDF primitives.
        """
        self.skip_ws()
        data, pos, n = self.data, self.pos, len(self.data)
        if pos >= n:
            raise CorruptPdf("unexpected end of data")
        c = data[pos]
        if c == 0x2F:  # '/'
            return self._read_name()
        if c == 0x28:  # '('
            return self._read_literal_string()
        if c == 0x3C:  # '<'
            if pos + 1 < n and data[pos + 1] == 0x3C:
                return self._read_dict()
            return self._read_hex_string()
        if c == 0x5B:  # '['
            return self._read_array()
        if c == 0x5D:  # ']'
            self.pos += 1
            return "]"
        if c == 0x3E:  # '>' (dict close handled in _read_dict)
            self.pos += 2
            return ">>"
        if c == 0x7B:  # '{' (PostScript calculator blobs, skip as keyword)
            self.pos += 1
            return "{"
        if c == 0x7D:
            self.pos += 1
            return "}"
        if c in b"+-.0123456789":
            return self._read_number()
        return self._read_keyword()

    def _read_keyword(self) -> str:
        data, n = self.data, len(self.data)
        start = self.pos
        pos = start
        while pos < n and is_regular(data[pos]):
            pos += 1
        self.pos = pos if pos > start else start + 1
        return data[start:self.pos].decode("latin-1")

    def _read_number(self):
        m = _NUMBER_RE.match(self.data, self.pos)
        if not m:
            self.pos += 1
            return 0
        self.pos = m.end()
        text = m.group(0)
        if b"." in text:
            return float(text)
        return int(text)

    def _read_name(self) -> Name:
        data, n = self.data, len(self.data)
        pos = self.pos + 1
        out = bytearray()
        while pos < n and is_regular(data[pos]):
            c = data[pos]
            if c == 0x23 and pos + 2 < n:  # '#xx' escape
                try:
                    out.append(int(data[pos + 1:pos + 3], 16))
                    pos += 3
                    continue
                except ValueError:
                    pass
            out.append(c)
            pos += 1
        self.pos = pos
        return Name(out.decode("latin-1"))

    def _read_literal_string(self) -> bytes:
        data, n = self.data, len(self.data)
        pos = self.pos + 1
        out = bytearray()
        depth = 1
        while pos < n:
            c = data[pos]
            if c == 0x5C:  # backslash
                pos += 1
                if pos >= n:
                    break
                e = data[pos]
                if e in b"nrtbf":
                    out.append({0x6E: 10, 0x72: 13, 0x74: 9, 0x62: 8, 0x66: 12}[e])
                    pos += 1
                elif e in b"()\\":
                    out.append(e)
                    pos += 1
                elif e in b"01234567":
                    oct_digits = bytearray()
                    while pos < n and len(oct_digits) < 3 and data[pos] in b"01234567":
                        oct_digits.append(data[pos])
                        pos += 1
                    out.append(int(oct_digits, 8) & 0xFF)
                elif e in b"\r\n":  # line continuation
                    pos += 1
                    if e == 0x0D and pos < n and data[pos] == 0x0A:
                        pos += 1
                else:
                    out.append(e)
                    pos += 1
                continue
            if c == 0x28:
                depth += 1
            elif c == 0x29:
                depth -= 1
                if depth == 0:
                    pos += 1
                    break
            out.append(c)
            pos += 1
        self.pos = pos
        return bytes(out)

    def _read_hex_string(self) -> bytes:
        data, n = self.data, len(self.data)
        pos = self.pos + 1
        digits = bytearray()
        while pos < n and data[pos] != 0x3E:
            c = data[pos]
            if c in b"0123456789abcdefABCDEF":
                digits.append(c)
            pos += 1
        self.pos = pos + 1
        if len(digits) % 2:
            digits.append(0x30)
        return bytes.fromhex(digits.decode("ascii"))

    def _read_array(self) -> list:
        self.pos += 1
        out = []
        while True:
            self.skip_ws()
            if self.peek_byte() == 0x5D:
                self.pos += 1
                break
            if self.peek_byte() == -1:
                raise CorruptPdf("unterminated array")
            out.append(self._read_value())
        return out

    def _read_dict(self) -> dict:
        self.pos += 2
        out: dict = {}
        while True:
            self.skip_ws()
            if self.peek_byte() == 0x3E:  # '>>'
                self.pos += 2
                break
            if self.peek_byte() == -1:
                raise CorruptPdf("unterminated dictionary")
            key = self.read_token()
            if not isinstance(key, Name):
                continue  # skip junk keys
            out[str(key)] = self._read_value()
        return out

    def _read_value(self):
        """Read one value, folding `N G R` reference triples."""
        token = self.read_token()
        if isinstance(token, int):
            save = self.pos
            try:
                second = self.read_token()
            except CorruptPdf:
                self.pos = save
                return token
            if isinstance(second, int):
                save2 = self.pos
                try:
                    third = self.read_token()
                except CorruptPdf:
                    third = None
                if third == "R":
                    return Ref(token, second)
                self.pos = save2
                self.pos = save
                return token
            self.pos = save
            return token
        if token == "true":
            return True
        if token == "false":
            return False
        if token == "null":
            return None
        return token


class PdfPage:
    """One page with inherited attributes resolved."""

    def __init__(self, document: "PdfDocument", node: dict, inherited: dict):
        self.document = document
        self.node = node
        self.media_box = self._resolve_box(node, inherited)
        self.rotate = int(document.resolve(node.get("Rotate", inherited.get("Rotate", 0))) or 0) % 360
        self.resources = document.resolve(node.get("Resources", inherited.get("Resources", {}))) or {}

    def _resolve_box(self, node: dict, inherited: dict):
        box = self.document.resolve(node.get("MediaBox", inherited.get("MediaBox")))
        if not box or len(box) != 4:
            box = [0, 0, 612, 792]  # US letter fallback
        vals = [float(self.document.resolve(v)) for v in box]
        x0, y0, x1, y1 = vals
        return (min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))

    @property
    def width(self) -> float:
        return self.media_box[2] - self.media_box[0]

    @property
    def height(self) -> float:
        return self.media_box[3] - self.media_box[1]

    def content_bytes(self) -> bytes:
        contents = self.document.resolve(self.node.get("Contents"))
        if contents is None:
            return b""
        if not isinstance(contents, list):
            contents = [contents]
        parts = []
        for item in contents:
            stream = self.document.resolve(item)
            if isinstance(stream, PdfStream):
                parts.append(self.document.stream_data(stream))
        return b"\n".join(parts)


class PdfDocument:
    """Parsed PDF with object lookup and the flattened page list."""

    def __init__(self, data: bytes):
        if b"%PDF-" not in data[:1024]:
            raise CorruptPdf("missing %PDF header")
        self.data = data
        self.objects: dict[int, object] = {}
        self.trailer: dict = {}
        self._scan_objects()
        self._scan_trailers()
        if "Encrypt" in self.trailer:
            raise CorruptPdf("encrypted PDFs are not supported")
        self._expand_object_streams()
        self._pages: list[PdfPage] | None = None

    @classmethod
    def open(cls, path: str | Path) -> "PdfDocument":
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise CorruptPdf(f"cannot read {path}: {exc}") from exc
        return cls(data)

    # --- loading ----------------------------------------------------------

    def _scan_objects(self) -> None:
        data = self.data
        pos = 0
        while True:
            m = _OBJ_RE.search(data, pos)
            if not m:
                break
            num = int(m.group(1))
            try:
                obj, end = self._parse_indirect(m.end())
            except CorruptPdf:
                pos = m.end()
                continue
            self.objects[num] = obj
            pos = end
        if not self.objects:
            raise CorruptPdf("no objects found")

    def _parse_indirect(self, body_start: int):
        """Parse the object body following `N G obj`; returns (object, end_pos)."""
        lex = Lexer(self.data, body_start)
        value = lex._read_value()
        lex.skip_ws()
        if isinstance(value, dict) and self.data.startswith(b"stream", lex.pos):
            start = lex.pos + len(b"stream")
            if self.data.startswith(b"\r\n", start):
                start += 2
            elif self.data.startswith(b"\n", start) or self.data.startswith(b"\r", start):
                start += 1
            length = value.get("Length")
            raw = None
            if isinstance(length, int) and length >= 0:
                end = start + length
                tail = self.data[end:end + 20]
                if b"endstream" in tail or end >= len(self.data):
                    raw = self.data[start:end]
                    endstream = self.data.find(b"endstream", end)
                else:
                    raw = None
            if raw is None:
                endstream = self.data.find(b"endstream", start)
                if endstream == -1:
                    raise CorruptPdf("unterminated stream")
                raw = self.data[start:endstream].rstrip(b"\r\n")
            end_pos = endstream + len(b"endstream") if endstream != -1 else len(self.data)
            return PdfStream(value, raw), end_pos
        return value, lex.pos

    def _scan_trailers(self) -> None:
        # Classic trailers, later ones override earlier keys.
        pos = 0
        while True:
            m = _TRAILER_RE.search(self.data, pos)
            if not m:
                break
            lex = Lexer(self.data, m.end())
            try:
                lex.skip_ws()
                if lex.peek_byte() == 0x3C:
                    tdict = lex._read_dict()
                    self.trailer.update(tdict)
            except CorruptPdf:
                pass
            pos = m.end()
        # Cross-reference streams double as trailers.
        for obj in self.objects.values():
            if isinstance(obj, PdfStream) and obj.dict.get("Type") == Name("XRef"):
                for key in ("Root", "Info", "Encrypt"):
                    if key in obj.dict and key not in self.trailer:
                        self.trailer[key] = obj.dict[key]

    def _expand_object_streams(self) -> None:
        compressed = [o for o in list(self.objects.values())
                      if isinstance(o, PdfStream) and o.dict.get("Type") == Name("ObjStm")]
        for stm in compressed:
            try:
                payload = self.stream_data(stm)
                count = int(self.resolve(stm.dict.get("N", 0)))
                first = int(self.resolve(stm.dict.get("First", 0)))
            except (CorruptPdf, TypeError, ValueError):
                continue
            header = Lexer(payload[:first])
            pairs = []
            try:
                for _ in range(count):
                    num = header.read_token()
                    off = header.read_token()
                    if isinstance(num, int) and isinstance(off, int):
                        pairs.append((num, off))
            except CorruptPdf:
                pass
            for num, off in pairs:
                try:
                    lex = Lexer(payload, first + off)
                    self.objects[num] = lex._read_value()
                except (CorruptPdf, IndexError):
                    continue

    # --- lookup -----------------------------------------------------------

    def resolve(self, obj, _depth: int = 0):
        while isinstance(obj, Ref):
            if _depth > 64:
                raise CorruptPdf("reference cycle")
            obj = self.objects.get(obj.num)
            _depth += 1
        return obj

    def stream_data(self, stream: PdfStream) -> bytes:
        filters = self.resolve(stream.dict.get("Filter"))
        if isinstance(filters, list):
            filters = [self.resolve(f) for f in filters]
        params = self.resolve(stream.dict.get("DecodeParms"))
        if isinstance(params, list):
            params = [self.resolve(p) for p in params]
        return apply_filters(stream.raw, filters, params)

    # --- page tree --------------------------------------------------------

    @property
    def pages(self) -> list[PdfPage]:
        if self._pages is None:
            self._pages = self._collect_pages()
        return self._pages

    @property
    def page_count(self) -> int:
        return len(self.pages)

    def _collect_pages(self) -> list[PdfPage]:
        root = self.resolve(self.trailer.get("Root"))
        pages_root = None
        if isinstance(root, dict):
            pages_root = self.resolve(root.get("Pages"))
        if not isinstance(pages_root, dict):
            pages_root = self._find_pages_root()
        out: list[PdfPage] = []
        if isinstance(pages_root, dict):
            self._walk(pages_root, {}, out, set())
        if not out:
            # Last resort: any /Type /Page objects in numeric order.
            for num in sorted(self.objects):
                node = self.objects[num]
                if isinstance(node, dict) and node.get("Type") == Name("Page"):
                    out.append(PdfPage(self, node, {}))
        if not out:
            raise CorruptPdf("document has no pages")
        return out

    def _find_pages_root(self):
        candidates = [o for o in self.objects.values()
                      if isinstance(o, dict) and o.get("Type") == Name("Pages")]
        roots = []
        for cand in candidates:
            if cand.get("Parent") is None:
                roots.append(cand)
        pool = roots or candidates
        if not pool:
            return None
        return max(pool, key=lambda d: int(self.resolve(d.get("Count", 0)) or 0))

    def _walk(self, node: dict, inherited: dict, out: list, seen: set) -> None:
        node_id = id(node)
        if node_id in seen or len(out) > 10000:
            return
        seen.add(node_id)
        merged = dict(inherited)
        for key in ("Resources", "MediaBox", "Rotate", "CropBox"):
            if key in node:
                merged[key] = node[key]
        node_type = node.get("Type")
        kids = self.resolve(node.get("Kids"))
        if node_type == Name("Page") or (node_type is None and kids is None and "Contents" in node):
            out.append(PdfPage(self, node, inherited))
            return
        if isinstance(kids, list):
            for kid in kids:
                kid = self.resolve(kid)
                if isinstance(kid, dict):
                    self._walk(kid, merged, out, seen)
