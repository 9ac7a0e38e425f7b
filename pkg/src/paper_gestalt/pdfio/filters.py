"""Stream filter decoders for the PDF reader.

Covers the filters that show up in practice in proceedings PDFs:
Flate (with PNG/TIFF predictors), ASCIIHex, ASCII85, RunLength and LZW.
DCT/JPX are image codecs and are handled at the image layer instead.
"""

from __future__ import annotations

import base64
import zlib

from ..errors import CorruptPdf


def apply_filters(data: bytes, filters, params) -> bytes:
    """Run `data` through a filter chain. `filters`/`params` may be single values or lists."""
    if filters is None:
        return data
    if not isinstance(filters, list):
        filters = [filters]
    if params is None:
        params = [None] * len(filters)
    elif not isinstance(params, list):
        params = [params]
    params = list(params) + [None] * (len(filters) - len(params))

    for name, parm in zip(filters, params):
        name = str(name)
        if name in ("FlateDecode", "Fl"):
            data = flate_decode(data, parm)
        elif name in ("ASCIIHexDecode", "AHx"):
            data = ascii_hex_decode(data)
        elif name in ("ASCII85Decode", "A85"):
            data = ascii85_decode(data)
        elif name in ("RunLengthDecode", "RL"):
            data = run_length_decode(data)
        elif name in ("LZWDecode", "LZW"):
            data = apply_predictor(lzw_decode(data), parm)
        elif name in ("DCTDecode", "DCT", "JPXDecode", "CCITTFaxDecode", "CCF", "JBIG2Decode"):
            # Image codecs: leave payload as-is for the image decoder.
            return data
        elif name == "Crypt":
            raise CorruptPdf("encrypted streams are not supported")
        else:
            raise CorruptPdf(f"unsupported stream filter {name!r}")
    return data


def flate_decode(data: bytes, params=None) -> bytes:
    try:
        out = zlib.decompress(data)
    except zlib.error:
        # Tolerate trailing garbage / missing checksum.
        try:
            out = zlib.decompressobj().decompress(data)
        except zlib.error as exc:
            raise CorruptPdf(f"bad Flate stream: {exc}") from exc
    return apply_predictor(out, params)


def apply_predictor(data: bytes, params) -> bytes:
    if not params:
        return data
    predictor = int(params.get("Predictor", 1) or 1)
    if predictor <= 1:
        return data
    colors = int(params.get("Colors", 1) or 1)
    bpc = int(params.get("BitsPerComponent", 8) or 8)
    columns = int(params.get("Columns", 1) or 1)
    bpp = max(1, (colors * bpc + 7) // 8)
    rowlen = (columns * colors * bpc + 7) // 8
    if predictor == 2:
        return _tiff_predictor(data, rowlen, bpp)
    return _png_predictor(data, rowlen, bpp)


def _tiff_predictor(data: bytes, rowlen: int, bpp: int) -> bytes:
    out = bytearray(data)
    for row in range(0, len(out) - rowlen + 1, rowlen):
        for i in range(row + bpp, row + rowlen):
            out[i] = (out[i] + out[i - bpp]) & 0xFF
    return bytes(out)


def _png_predictor(data: bytes, rowlen: int, bpp: int) -> bytes:
    out = bytearray()
    prev = bytearray(rowlen)
    pos = 0
    n = len(data)
    while pos + 1 <= n:
        ftype = data[pos]
        row = bytearray(data[pos + 1:pos + 1 + rowlen])
        if len(row) < rowlen:
            row.extend(b"\x00" * (rowlen - len(row)))
        pos += 1 + rowlen
        if ftype == 0:
            pass
        elif ftype == 1:  # Sub
            for i in range(bpp, rowlen):
                row[i] = (row[i] + row[i - bpp]) & 0xFF
        elif ftype == 2:  # Up
            for i in range(rowlen):
                row[i] = (row[i] + prev[i]) & 0xFF
        elif ftype == 3:  # Average
            for i in range(rowlen):
                left = row[i - bpp] if i >= bpp else 0
                row[i] = (row[i] + ((left + prev[i]) >> 1)) & 0xFF
        elif ftype == 4:  # Paeth
            for i in range(rowlen):
                left = row[i - bpp] if i >= bpp else 0
                up = prev[i]
                ul = prev[i - bpp] if i >= bpp else 0
                p = left + up - ul
                pa, pb, pc = abs(p - left), abs(p - up), abs(p - ul)
                if pa <= pb and pa <= pc:
                    pred = left
                elif pb <= pc:
                    pred = up
                else:
                    pred = ul
                row[i] = (row[i] + pred) & 0xFF
        else:
            raise CorruptPdf(f"unknown PNG predictor row filter {ftype}")
        out.extend(row)
        prev = row
    return bytes(out)


def ascii_hex_decode(data: bytes) -> bytes:
    text = data.split(b">")[0]
    text = bytes(c for c in text if c not in b" \t\r\n\f\x00")
    if len(text) % 2:
        text += b"0"
    try:
        return bytes.fromhex(text.decode("ascii"))
    except ValueError as exc:
        raise CorruptPdf(f"bad ASCIIHex stream: {exc}") from exc


def ascii85_decode(data: bytes) -> bytes:
    text = data.strip()
    if text.startswith(b"<~"):
        text = text[2:]
    end = text.find(b"~>")
    if end != -1:
        text = text[:end]
    text = bytes(c for c in text if c not in b" \t\r\n\f\x00")
    try:
        return base64.a85decode(text, adobe=False)
    except ValueError as exc:
        raise CorruptPdf(f"bad ASCII85 stream: {exc}") from exc


def run_length_decode(data: bytes) -> bytes:
    out = bytearray()
    pos = 0
    n = len(data)
    while pos < n:
        length = data[pos]
        pos += 1
        if length == 128:
            break
        if length < 128:
            out.extend(data[pos:pos + length + 1])
            pos += length + 1
        else:
            if pos < n:
                out.extend(bytes([data[pos]]) * (257 - length))
                pos += 1
    return bytes(out)


def lzw_decode(data: bytes) -> bytes:
    """LZW with variable code width 9..12 bits and early code-width change."""
    out = bytearray()
    table = {i: bytes([i]) for i in range(256)}
    next_code = 258
    width = 9
    prev: bytes | None = None
    bitbuf = 0
    nbits = 0
    for byte in data:
        bitbuf = (bitbuf << 8) | byte
        nbits += 8
        while nbits >= width:
            code = (bitbuf >> (nbits - width)) & ((1 << width) - 1)
            nbits -= width
            if code == 256:  # clear table
                table = {i: bytes([i]) for i in range(256)}
                next_code = 258
                width = 9
                prev = None
                continue
            if code == 257:  # end of data
                return bytes(out)
            if prev is None:
                entry = table[code]
            elif code in table:
                entry = table[code]
                table[next_code] = prev + entry[:1]
                next_code += 1
            elif code == next_code:
                entry = prev + prev[:1]
                table[next_code] = entry
                next_code += 1
            else:
                raise CorruptPdf("bad LZW code sequence")
            out.extend(entry)
            prev = entry
            if next_code >= (1 << width) - 1 and width < 12:
                width += 1
    return bytes(out)
