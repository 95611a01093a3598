"""Corpus ingestion for MMLU-style JSONL records and plain-text files."""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator


class CorpusError(ValueError):
    """Malformed corpus input."""


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    question: str
    choices: tuple[str, ...] = ()
    subject: str | None = None

    def __post_init__(self):
        if not self.question:
            raise CorpusError(f"record {self.id!r}: empty question")
        if any(not c for c in self.choices):
            raise CorpusError(f"record {self.id!r}: empty choice string")


@dataclass(frozen=True)
class CorpusStats:
    char_count: int = 0
    word_count: int = 0
    record_count: int = 0

    def __add__(self, other: CorpusStats) -> CorpusStats:
        return CorpusStats(
            self.char_count + other.char_count,
            self.word_count + other.word_count,
            self.record_count + other.record_count,
        )


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def _record_from_json(obj, lineno: int) -> CorpusRecord:
    if not isinstance(obj, dict):
        raise CorpusError(f"line {lineno}: expected a JSON object")
    question = obj.get("question")
    if not isinstance(question, str):
        raise CorpusError(f"line {lineno}: missing or non-string 'question'")
    choices = obj.get("choices", [])
    if not isinstance(choices, list) or not all(isinstance(c, str) for c in choices):
        raise CorpusError(f"line {lineno}: 'choices' must be an array of strings")
    subject = obj.get("subject")
    if subject is not None and not isinstance(subject, str):
        raise CorpusError(f"line {lineno}: 'subject' must be a string")
    try:
        return CorpusRecord(
            id=str(obj.get("id", f"line-{lineno}")),
            question=_nfc(question),
            choices=tuple(_nfc(c) for c in choices),
            subject=subject,
        )
    except CorpusError as exc:
        raise CorpusError(f"line {lineno}: {exc}") from None


def load_corpus(path: str | Path, format: str = "jsonl-records") -> Iterator[CorpusRecord]:
    """Yield records from ``path`` in file order.

    ``format`` is ``"jsonl-records"`` or ``"plain-text"`` (one record per line).
    Blank lines are skipped in both formats. Text is NFC-normalized once, here.
    """
    if format not in ("jsonl-records", "plain-text"):
        raise CorpusError(f"unknown corpus format {format!r}")
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(f"{path}: not valid UTF-8 ({exc})") from exc

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if format == "plain-text":
            yield CorpusRecord(id=f"line-{lineno}", question=_nfc(line))
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        yield _record_from_json(obj, lineno)


def corpus_text(record: CorpusRecord) -> str:
    """Question followed by each choice on its own line."""
    return "\n".join((record.question, *record.choices))


def compute_stats(corpus: Iterable[CorpusRecord]) -> CorpusStats:
    chars = words = n = 0
    for record in corpus:
        text = corpus_text(record)
        chars += len(text)
        words += len(text.split())
        n += 1
    return CorpusStats(chars, words, n)
