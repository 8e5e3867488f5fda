"""Small text helpers shared across modules: NFC-based counting and hashing."""

from __future__ import annotations

import unicodedata

_FNV64_OFFSET = 0xCBF29CE484222325
_FNV64_PRIME = 0x100000001B3


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def char_count(text: str) -> int:
    """Unicode scalar count after NFC normalization."""
    return len(nfc(text))


def word_count(text: str) -> int:
    """Whitespace-delimited token count."""
    return len(text.split())


def fnv1a64(text: str) -> int:
    """64-bit FNV-1a over the UTF-8 bytes of the NFC-normalized text.

    Stable across platforms and Python versions; used for cache keys and
    for seeding the deterministic mock embedder.
    """
    h = _FNV64_OFFSET
    for byte in nfc(text).encode("utf-8"):
        h ^= byte
        h = (h * _FNV64_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h
