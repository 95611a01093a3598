"""Per-tokenizer evaluation: efficiency counts plus %TR and %Pure."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, fields
from typing import Iterable

from .bpe import ExternalDump, TokenizerModel, encode_corpus
from .corpus import CorpusRecord
from .morphology import MorphologyResource, is_pure
from .surface import CharClass, normalize

log = logging.getLogger(__name__)


class UndefinedMetricError(ValueError):
    """A percentage metric with an empty denominator."""


def tr_percentage(valid_unique: int, unique: int) -> float:
    """Share of unique tokens that are valid words, in percent."""
    if unique <= 0:
        raise UndefinedMetricError("%TR undefined: no unique tokens")
    return 100.0 * valid_unique / unique


def pure_percentage(pure_unique: int, unique: int) -> float:
    """Share of unique tokens that are single atomic morphemes, in percent."""
    if unique <= 0:
        raise UndefinedMetricError("%Pure undefined: no unique tokens")
    return 100.0 * pure_unique / unique


# Column order follows the benchmark table's row order, then the raw counts.
RECORD_COLUMNS = (
    "tokenizer_name",
    "params_billions",
    "mmlu_score",
    "vocab_size",
    "total_tokens",
    "wall_seconds",
    "unique_tokens",
    "tr_pct",
    "pure_pct",
    "valid_unique",
    "pure_unique",
)


@dataclass
class MetricRecord:
    tokenizer_name: str
    vocab_size: int
    total_tokens: int
    unique_tokens: int
    tr_pct: float
    pure_pct: float
    wall_seconds: float | None = None
    valid_unique: int | None = None
    pure_unique: int | None = None
    mmlu_score: float | None = None
    params_billions: float | None = None

    def violations(self, bound_morphemes_pure: bool = False) -> list[str]:
        """Broken record invariants; empty for a consistent record."""
        out = []
        if self.vocab_size <= 0:
            out.append("vocab_size must be positive")
        if not 0 <= self.tr_pct <= 100 or not 0 <= self.pure_pct <= 100:
            out.append("percentages must lie in [0, 100]")
        if self.valid_unique is not None and self.pure_unique is not None:
            if self.valid_unique > self.unique_tokens:
                out.append("valid_unique > unique_tokens")
            if self.pure_unique > self.unique_tokens:
                out.append("pure_unique > unique_tokens")
            if not bound_morphemes_pure and self.pure_unique > self.valid_unique:
                out.append("pure_unique > valid_unique")
            if self.unique_tokens > 0:
                if abs(self.tr_pct - tr_percentage(self.valid_unique, self.unique_tokens)) > 1e-9:
                    out.append("tr_pct inconsistent with counts")
                if abs(self.pure_pct - pure_percentage(self.pure_unique, self.unique_tokens)) > 1e-9:
                    out.append("pure_pct inconsistent with counts")
        if not bound_morphemes_pure and self.pure_pct > self.tr_pct:
            out.append("pure_pct > tr_pct")
        if self.mmlu_score is not None and not 0 <= self.mmlu_score <= 100:
            out.append("mmlu_score must lie in [0, 100]")
        if self.params_billions is not None and self.params_billions <= 0:
            out.append("params_billions must be positive")
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in RECORD_COLUMNS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> MetricRecord:
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


def _csv_cell(value) -> str:
    return "" if value is None else repr(value) if isinstance(value, float) else str(value)


def records_to_csv(records: Iterable[MetricRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_COLUMNS)
    for rec in records:
        d = rec.to_dict()
        writer.writerow([_csv_cell(d[c]) for c in RECORD_COLUMNS])
    return buf.getvalue()


_INT_FIELDS = {"vocab_size", "total_tokens", "unique_tokens", "valid_unique", "pure_unique"}


def records_from_csv(text: str) -> list[MetricRecord]:
    """Parse metric rows. Integer cells may carry thousands separators ("256,000")."""
    records = []
    for row in csv.DictReader(io.StringIO(text)):
        values: dict = {}
        for key, cell in row.items():
            if key is None or key not in RECORD_COLUMNS:
                continue
            cell = (cell or "").strip()
            if key == "tokenizer_name":
                values[key] = cell
            elif not cell:
                values[key] = None
            elif key in _INT_FIELDS:
                values[key] = int(cell.replace(",", ""))
            else:
                values[key] = float(cell.replace(",", ""))
        records.append(MetricRecord.from_dict(values))
    return records


@dataclass(frozen=True)
class EvalConfig:
    repeats: int = 5
    alpha_only: bool = False
    include_whitespace: bool = False
    count_bound_morphemes_as_pure: bool = False
    workers: int = 1


@dataclass(frozen=True)
class UniqueBreakdown:
    unique: frozenset[str]
    valid: frozenset[str]
    pure: frozenset[str]


def classify_surfaces(
    raw_surfaces: Iterable[str],
    policy,
    resource: MorphologyResource,
    config: EvalConfig = EvalConfig(),
) -> UniqueBreakdown:
    """Unique clean surfaces (case kept) and which of them are valid / pure.

    Lookups use the Turkish-folded form; non-alphabetic tokens count as
    unique but never valid.
    """
    unique: dict[str, str] = {}
    for raw in set(raw_surfaces):
        cand = normalize(raw, policy)
        if cand.char_class is CharClass.WHITESPACE and not config.include_whitespace:
            continue
        if config.alpha_only and cand.char_class is not CharClass.ALPHABETIC:
            continue
        unique[cand.clean_surface] = cand.folded if cand.char_class is CharClass.ALPHABETIC else ""
    valid = set()
    pure = set()
    for clean, folded in unique.items():
        if not folded:
            continue
        if resource.parse(folded) is not None:
            valid.add(clean)
        if is_pure(folded, resource, config.count_bound_morphemes_as_pure):
            pure.add(clean)
    return UniqueBreakdown(frozenset(unique), frozenset(valid), frozenset(pure))


def evaluate_tokenizer(
    source: TokenizerModel | ExternalDump,
    corpus: Iterable[CorpusRecord] | None,
    resource: MorphologyResource,
    config: EvalConfig = EvalConfig(),
    mmlu_score: float | None = None,
    params_billions: float | None = None,
) -> MetricRecord:
    """Run one tokenizer over the corpus (or replay its dump) and fill a MetricRecord."""
    if resource is None:
        raise ValueError("a morphology resource is required")
    if isinstance(source, ExternalDump):
        stats = source.stats
        vocab_size = source.declared_vocab_size
        seconds = source.declared_wall_seconds
        policy = source.marker_policy
    else:
        stats, timing = encode_corpus(corpus or [], source, repeats=config.repeats, workers=config.workers)
        vocab_size = source.vocab_size
        seconds = timing.wall_seconds
        policy = source.marker_policy

    breakdown = classify_surfaces(stats.surface_counts, policy, resource, config)
    n = len(breakdown.unique)
    if n == 0:
        raise UndefinedMetricError(f"{source.name}: no unique tokens after filtering")
    record = MetricRecord(
        tokenizer_name=source.name,
        vocab_size=vocab_size,
        total_tokens=stats.total_tokens,
        unique_tokens=n,
        tr_pct=tr_percentage(len(breakdown.valid), n),
        pure_pct=pure_percentage(len(breakdown.pure), n),
        wall_seconds=seconds,
        valid_unique=len(breakdown.valid),
        pure_unique=len(breakdown.pure),
        mmlu_score=mmlu_score,
        params_billions=params_billions,
    )
    problems = record.violations(config.count_bound_morphemes_as_pure)
    if problems:
        raise AssertionError(f"{source.name}: inconsistent metric record: {'; '.join(problems)}")
    log.info("%s: unique=%d valid=%d pure=%d", source.name, n, record.valid_unique, record.pure_unique)
    return record
