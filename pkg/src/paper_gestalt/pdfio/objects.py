"""Primitive PDF object types.

PDF dictionaries become plain dicts keyed by the name without the slash,
arrays become lists, strings stay bytes. Names and indirect references get
thin wrapper types so the interpreter can tell them apart from text.
"""

from __future__ import annotations

from typing import NamedTuple


class Name(str):
    """A PDF name object (the token `/Foo` becomes Name('Foo'))."""

    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return f"/{str(self)}"


class Ref(NamedTuple):
    """Indirect object reference `num gen R`."""

    num: int
    gen: int


class PdfStream:
    """A stream object: its dictionary plus raw (still encoded) payload."""

    def __init__(self, dictionary: dict, raw: bytes):
        self.dict = dictionary
        self.raw = raw

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return f"<PdfStream {len(self.raw)} raw bytes {self.dict}>"


_WHITESPACE = b"\x00\t\n\x0c\r "
_DELIMITERS = b"()<>[]{}/%"


def is_whitespace(byte: int) -> bool:
    return byte in _WHITESPACE


def is_delimiter(byte: int) -> bool:
    return byte in _DELIMITERS


def is_regular(byte: int) -> bool:
    return byte not in _WHITESPACE and byte not in _DELIMITERS
