"""Byte-level BPE loading, encoding and corpus-level timing.

Model files use the ``tokenizer.json`` layout (``{"model": {"type": "BPE",
"vocab": ..., "merges": ...}}``). Tokenizers that are not BPE, or that we do
not want to reimplement, participate through plain-text token dumps instead
(see :func:`ingest_external_tokens`).
"""

from __future__ import annotations

import heapq
import json
import logging
import re
import statistics
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import CorpusRecord, corpus_text

log = logging.getLogger(__name__)


class TokenizerError(ValueError):
    """Invalid tokenizer definition or unencodable input."""


class MarkerPolicy(str, Enum):
    BYTE_LEVEL_SPACE = "ByteLevelSpace"
    UNDERSCORE_PREFIX = "UnderscorePrefix"
    HASH_HASH_CONTINUATION = "HashHashContinuation"
    NONE = "None"


UNDERSCORE = "▁"


@lru_cache(maxsize=None)
def bytes_to_unicode() -> dict[int, str]:
    """The GPT-2 byte -> printable character table."""
    bs = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("¡"), ord("¬") + 1))
        + list(range(ord("®"), ord("ÿ") + 1))
    )
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return {b: chr(c) for b, c in zip(bs, cs)}


@lru_cache(maxsize=None)
def unicode_to_bytes() -> dict[str, int]:
    return {c: b for b, c in bytes_to_unicode().items()}


def byte_encode(text: str) -> str:
    table = bytes_to_unicode()
    return "".join(table[b] for b in text.encode("utf-8"))


def byte_decode(mapped: str, errors: str = "strict") -> str:
    """Inverse of :func:`byte_encode`. Raises KeyError on characters outside the alphabet."""
    table = unicode_to_bytes()
    return bytes(table[c] for c in mapped).decode("utf-8", errors=errors)


# Whitespace + punctuation boundaries. A single leading space sticks to the
# following word; whitespace runs keep their last space for the next word.
_PRETOKENIZE = re.compile(r" ?\w+| ?[^\s\w]+|\s+(?!\S)|\s+")


@dataclass(frozen=True, eq=False)
class TokenizerModel:
    name: str
    vocab: dict[str, int]
    merges: tuple[tuple[str, str], ...]
    byte_level: bool = False
    marker_policy: MarkerPolicy = MarkerPolicy.NONE
    unk_token: str | None = None
    ranks: dict[tuple[str, str], int] = field(init=False, repr=False)
    id_to_token: dict[int, str] = field(init=False, repr=False)

    def __post_init__(self):
        seen: dict[int, str] = {}
        for tok, idx in self.vocab.items():
            if not isinstance(idx, int) or idx < 0:
                raise TokenizerError(f"token {tok!r}: id must be a non-negative integer, got {idx!r}")
            if idx in seen:
                raise TokenizerError(f"duplicate id {idx} for tokens {seen[idx]!r} and {tok!r}")
            seen[idx] = tok
        ranks = {}
        for rank, (left, right) in enumerate(self.merges):
            if left + right not in self.vocab:
                raise TokenizerError(f"merge ({left!r}, {right!r}): result {left + right!r} not in vocab")
            ranks.setdefault((left, right), rank)
        if self.unk_token is not None and self.unk_token not in self.vocab:
            raise TokenizerError(f"unk_token {self.unk_token!r} not in vocab")
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "id_to_token", seen)

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def __reduce__(self):
        return (
            TokenizerModel,
            (self.name, self.vocab, self.merges, self.byte_level, self.marker_policy, self.unk_token),
        )


@dataclass(frozen=True)
class TokenSequence:
    token_ids: tuple[int, ...]
    surfaces: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.token_ids)


@dataclass(frozen=True)
class TimingResult:
    wall_seconds: float
    tokens_emitted: int
    repeats: int


@dataclass
class TokenStats:
    """Mergeable corpus totals: token count plus surface frequencies."""

    total_tokens: int = 0
    surface_counts: Counter = field(default_factory=Counter)

    def add(self, seq: TokenSequence) -> None:
        self.total_tokens += len(seq)
        self.surface_counts.update(seq.surfaces)

    def merge(self, other: TokenStats) -> TokenStats:
        return TokenStats(self.total_tokens + other.total_tokens, self.surface_counts + other.surface_counts)

    @property
    def unique_surfaces(self) -> set[str]:
        return set(self.surface_counts)


def _parse_merge(entry) -> tuple[str, str]:
    if isinstance(entry, str):
        parts = entry.split(" ")
        if len(parts) != 2:
            raise TokenizerError(f"malformed merge entry {entry!r}")
        return parts[0], parts[1]
    if isinstance(entry, (list, tuple)) and len(entry) == 2 and all(isinstance(p, str) for p in entry):
        return entry[0], entry[1]
    raise TokenizerError(f"malformed merge entry {entry!r}")


def _component_type(component) -> set[str]:
    """Collect "type" names from a (possibly Sequence-wrapped) pre_tokenizer/decoder block."""
    if not isinstance(component, dict):
        return set()
    types = {component.get("type")}
    for sub in component.get("pretokenizers", []) + component.get("decoders", []):
        types |= _component_type(sub)
    return types


def model_from_dict(data: dict, name: str = "bpe") -> TokenizerModel:
    model = data.get("model", data)
    if model.get("type", "BPE") != "BPE":
        raise TokenizerError(f"unsupported model type {model.get('type')!r}; only BPE is native")
    vocab = model.get("vocab")
    if not isinstance(vocab, dict):
        raise TokenizerError("model.vocab must be an object")
    merges = tuple(_parse_merge(m) for m in model.get("merges", []))

    kinds = _component_type(data.get("pre_tokenizer")) | _component_type(data.get("decoder"))
    byte_level = "ByteLevel" in kinds
    if byte_level:
        policy = MarkerPolicy.BYTE_LEVEL_SPACE
    elif "Metaspace" in kinds:
        policy = MarkerPolicy.UNDERSCORE_PREFIX
    elif "WordPiece" in kinds or model.get("continuing_subword_prefix") == "##":
        policy = MarkerPolicy.HASH_HASH_CONTINUATION
    else:
        policy = MarkerPolicy.NONE
    if "marker_policy" in data:
        policy = MarkerPolicy(data["marker_policy"])

    vocab = dict(vocab)
    if byte_level:
        # byte fallback: every single byte must be encodable
        next_id = max(vocab.values(), default=-1) + 1
        for ch in bytes_to_unicode().values():
            if ch not in vocab:
                vocab[ch] = next_id
                next_id += 1
    return TokenizerModel(
        name=data.get("name", name),
        vocab=vocab,
        merges=merges,
        byte_level=byte_level,
        marker_policy=policy,
        unk_token=model.get("unk_token"),
    )


def load_bpe(path: str | Path, name: str | None = None) -> TokenizerModel:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TokenizerError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(data, name=name or path.stem)


def save_bpe(model: TokenizerModel, path: str | Path) -> None:
    data = {
        "name": model.name,
        "marker_policy": model.marker_policy.value,
        "model": {
            "type": "BPE",
            "unk_token": model.unk_token,
            "vocab": model.vocab,
            "merges": [list(m) for m in model.merges],
        },
    }
    if model.byte_level:
        data["pre_tokenizer"] = {"type": "ByteLevel"}
    Path(path).write_text(json.dumps(data, ensure_ascii=False, indent=1), encoding="utf-8")


def pretokenize(text: str, model: TokenizerModel) -> list[str]:
    if model.byte_level:
        return [byte_encode(piece) for piece in _PRETOKENIZE.findall(text)]
    words = text.split()
    if model.marker_policy is MarkerPolicy.UNDERSCORE_PREFIX:
        return [w if i == 0 else UNDERSCORE + w for i, w in enumerate(words)]
    return words


def merge_piece(symbols: Sequence[str], ranks: dict[tuple[str, str], int]) -> list[str]:
    """Apply the lowest-ranked applicable merge (leftmost on ties) until none applies.

    Doubly linked list over symbol slots plus a heap of candidate pairs keyed
    by (rank, left slot). Stale heap entries are skipped on pop.
    """
    n = len(symbols)
    if n < 2:
        return list(symbols)
    syms = list(symbols)
    nxt = list(range(1, n + 1))
    prv = list(range(-1, n - 1))
    alive = [True] * n
    heap = []
    for i in range(n - 1):
        r = ranks.get((syms[i], syms[i + 1]))
        if r is not None:
            heap.append((r, i, syms[i], syms[i + 1]))
    heapq.heapify(heap)

    while heap:
        r, i, left, right = heapq.heappop(heap)
        j = nxt[i] if alive[i] else n
        if j >= n or syms[i] != left or syms[j] != right:
            continue
        syms[i] = left + right
        alive[j] = False
        nxt[i] = nxt[j]
        if nxt[j] < n:
            prv[nxt[j]] = i
        p = prv[i]
        if p >= 0:
            pr = ranks.get((syms[p], syms[i]))
            if pr is not None:
                heapq.heappush(heap, (pr, p, syms[p], syms[i]))
        k = nxt[i]
        if k < n:
            kr = ranks.get((syms[i], syms[k]))
            if kr is not None:
                heapq.heappush(heap, (kr, i, syms[i], syms[k]))

    out = []
    i = 0
    while i < n:
        out.append(syms[i])
        i = nxt[i]
    return out


class Encoder:
    """Encodes text with one model, caching per-piece segmentations."""

    def __init__(self, model: TokenizerModel):
        self.model = model
        self._cache: dict[str, tuple[tuple[int, ...], tuple[str, ...]]] = {}

    def clear_cache(self) -> None:
        self._cache.clear()

    def _initial_symbols(self, piece: str) -> list[str]:
        model = self.model
        if model.byte_level:
            return list(piece)
        symbols = []
        for ch in piece:
            if ch in model.vocab:
                symbols.append(ch)
            elif model.unk_token is not None:
                symbols.append(model.unk_token)
            else:
                raise TokenizerError(f"{model.name}: symbol {ch!r} not in vocab and no unk_token")
        return symbols

    def encode_piece(self, piece: str) -> tuple[tuple[int, ...], tuple[str, ...]]:
        hit = self._cache.get(piece)
        if hit is not None:
            return hit
        surfaces = tuple(merge_piece(self._initial_symbols(piece), self.model.ranks))
        vocab = self.model.vocab
        result = (tuple(vocab[s] for s in surfaces), surfaces)
        self._cache[piece] = result
        return result

    def encode(self, text: str) -> TokenSequence:
        ids: list[int] = []
        surfaces: list[str] = []
        for piece in pretokenize(text, self.model):
            piece_ids, piece_surfaces = self.encode_piece(piece)
            ids.extend(piece_ids)
            surfaces.extend(piece_surfaces)
        return TokenSequence(tuple(ids), tuple(surfaces))


def encode(text: str, model: TokenizerModel) -> TokenSequence:
    return Encoder(model).encode(text)


def decode(surfaces: Iterable[str], model: TokenizerModel) -> str:
    """Concatenate surfaces back into text. Exact inverse for byte-level models."""
    joined = "".join(surfaces)
    if model.byte_level:
        return byte_decode(joined, errors="replace")
    if model.marker_policy is MarkerPolicy.UNDERSCORE_PREFIX:
        return joined.replace(UNDERSCORE, " ")
    return joined


def _stats_for(model: TokenizerModel, records: Sequence[CorpusRecord]) -> TokenStats:
    encoder = Encoder(model)
    stats = TokenStats()
    for record in records:
        try:
            stats.add(encoder.encode(corpus_text(record)))
        except TokenizerError as exc:
            raise TokenizerError(f"record {record.id!r}: {exc}") from None
    return stats


def _chunks(items: Sequence, n: int) -> list[Sequence]:
    size = max(1, -(-len(items) // n))
    return [items[i : i + size] for i in range(0, len(items), size)]


def count_tokens(model: TokenizerModel, records: Sequence[CorpusRecord], workers: int = 1) -> TokenStats:
    """Token totals and surface frequencies, optionally fanned out over processes."""
    records = list(records)
    if workers <= 1 or len(records) < 2:
        return _stats_for(model, records)
    parts = _chunks(records, workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        partials = list(pool.map(_stats_for, [model] * len(parts), parts))
    total = TokenStats()
    for part in partials:
        total = total.merge(part)
    return total


def encode_corpus(
    corpus: Iterable[CorpusRecord],
    model: TokenizerModel,
    repeats: int = 5,
    workers: int = 1,
) -> tuple[TokenStats, TimingResult]:
    """Encode every record; time encode-only passes (median of ``repeats`` after one warm-up).

    Timed passes run single-threaded with a cold piece cache each time, so
    every pass does the same work. ``workers`` only affects the counting pass.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    records = list(corpus)
    texts = [corpus_text(r) for r in records]
    stats = count_tokens(model, records, workers=workers)

    encoder = Encoder(model)
    timings = []
    for run in range(repeats + 1):
        encoder.clear_cache()
        start = time.perf_counter()
        for text in texts:
            encoder.encode(text)
        elapsed = time.perf_counter() - start
        if run > 0:
            timings.append(elapsed)
    timing = TimingResult(statistics.median(timings), stats.total_tokens, repeats)
    log.debug("%s: %d tokens, median %.4fs over %d runs", model.name, stats.total_tokens, timing.wall_seconds, repeats)
    return stats, timing


@dataclass(frozen=True)
class ExternalDump:
    """Token stream produced by a tokenizer outside this package."""

    name: str
    declared_vocab_size: int
    declared_wall_seconds: float | None
    marker_policy: MarkerPolicy
    stats: TokenStats

    @property
    def total_tokens(self) -> int:
        return self.stats.total_tokens

    @property
    def unique_surfaces(self) -> set[str]:
        return self.stats.unique_surfaces


def ingest_external_tokens(path: str | Path) -> ExternalDump:
    """Read a token dump.

    Header line: ``<name> <vocab_size> [<wall_seconds>] [policy=<MarkerPolicy>]``,
    then one token surface per line. Tokens are taken verbatim (only the line
    terminator is removed), so surfaces containing newlines must be dumped in
    their byte-level form.
    """
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\r\n")
        fields = header.split()
        if len(fields) < 2:
            raise TokenizerError(f"{path}: missing header '<name> <vocab_size>'")
        name = fields[0]
        try:
            vocab_size = int(fields[1])
        except ValueError:
            raise TokenizerError(f"{path}: header vocab size {fields[1]!r} is not an integer") from None
        seconds = None
        policy = MarkerPolicy.NONE
        for extra in fields[2:]:
            if extra.startswith("policy="):
                try:
                    policy = MarkerPolicy(extra.split("=", 1)[1])
                except ValueError:
                    raise TokenizerError(f"{path}: unknown marker policy in {extra!r}") from None
            else:
                try:
                    seconds = float(extra)
                except ValueError:
                    raise TokenizerError(f"{path}: unrecognised header field {extra!r}") from None

        counts: Counter = Counter()
        total = 0
        for lineno, line in enumerate(fh, start=2):
            token = line.rstrip("\r\n")
            if not token:
                raise TokenizerError(f"{path}: empty token on line {lineno}")
            counts[token] += 1
            total += 1
    return ExternalDump(name, vocab_size, seconds, policy, TokenStats(total, counts))


def write_token_dump(
    path: str | Path,
    name: str,
    vocab_size: int,
    tokens: Iterable[str],
    wall_seconds: float | None = None,
    policy: MarkerPolicy = MarkerPolicy.NONE,
) -> None:
    header = [name, str(vocab_size)]
    if wall_seconds is not None:
        header.append(repr(float(wall_seconds)))
    if policy is not MarkerPolicy.NONE:
        header.append(f"policy={policy.value}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(" ".join(header) + "\n")
        for tok in tokens:
            if not tok or "\n" in tok or "\r" in tok:
                raise TokenizerError(f"token {tok!r} cannot be written to a line-based dump")
            fh.write(tok + "\n")
