"""Raw token surface -> linguistic candidate form."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import Enum

from .bpe import UNDERSCORE, MarkerPolicy, unicode_to_bytes


class CharClass(str, Enum):
    ALPHABETIC = "Alphabetic"
    NUMERIC = "Numeric"
    PUNCTUATION = "Punctuation"
    MIXED = "Mixed"
    WHITESPACE = "Whitespace"


@dataclass(frozen=True)
class CandidateToken:
    raw_surface: str
    clean_surface: str
    folded: str
    char_class: CharClass


def turkish_fold(s: str) -> str:
    """Lowercase with Turkish dotted/dotless i rules (I -> ı, İ -> i)."""
    return s.replace("I", "ı").replace("İ", "i").lower()


def classify(s: str) -> CharClass:
    if not s or s.isspace():
        return CharClass.WHITESPACE
    if all(ch.isalpha() for ch in s):
        return CharClass.ALPHABETIC
    if all(ch.isnumeric() for ch in s):
        return CharClass.NUMERIC
    if all(unicodedata.category(ch)[0] in "PS" for ch in s):
        return CharClass.PUNCTUATION
    return CharClass.MIXED


def _byte_decode(raw: str) -> tuple[str, bool]:
    """Decode a byte-level surface; second item is False if the bytes were not clean UTF-8."""
    table = unicode_to_bytes()
    try:
        data = bytes(table[c] for c in raw)
    except KeyError:
        # outside the byte alphabet: already plain text
        return raw, True
    try:
        return data.decode("utf-8"), True
    except UnicodeDecodeError:
        return data.decode("utf-8", errors="replace"), False


def strip_markers(raw: str, policy: MarkerPolicy) -> tuple[str, bool]:
    if policy is MarkerPolicy.BYTE_LEVEL_SPACE:
        text, ok = _byte_decode(raw)
        return text.lstrip(" "), ok
    if policy is MarkerPolicy.UNDERSCORE_PREFIX:
        return raw.replace(UNDERSCORE, ""), True
    if policy is MarkerPolicy.HASH_HASH_CONTINUATION:
        text = raw
        while text.startswith("##"):
            text = text[2:]
        return text, True
    return raw, True


def normalize(raw: str, policy: MarkerPolicy = MarkerPolicy.NONE) -> CandidateToken:
    """Strip subword markers, decode byte-level text, fold and classify.

    A byte-level surface whose bytes are not valid UTF-8 (a split multi-byte
    character) keeps U+FFFD replacement characters and is classed Mixed.
    """
    clean, ok = strip_markers(raw, policy)
    clean = unicodedata.normalize("NFC", clean)
    char_class = classify(clean) if ok else CharClass.MIXED
    return CandidateToken(raw, clean, turkish_fold(clean), char_class)
