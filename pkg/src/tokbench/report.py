"""Pearson correlation across metric records, leaderboard tables, plot data."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

from .metrics import MetricRecord, records_to_csv


class CorrelationError(ValueError):
    """Correlation requested on unusable input."""


UNDEFINED = "undefined"

# field name -> display label, in the benchmark table's row order
METRIC_LABELS = {
    "params_billions": "Model Parameters (B)",
    "mmlu_score": "MMLU Score (%)",
    "vocab_size": "Vocabulary Size",
    "total_tokens": "Token Count",
    "wall_seconds": "Processing Time (s)",
    "unique_tokens": "Unique Token Count",
    "tr_pct": "TR %",
    "pure_pct": "Pure %",
}

DEFAULT_CORRELATION_METRICS = ("mmlu_score", "tr_pct", "pure_pct", "vocab_size", "total_tokens", "wall_seconds")


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    n = len(xs)
    if n != len(ys):
        raise CorrelationError(f"length mismatch: {n} vs {len(ys)}")
    if n < 3:
        raise CorrelationError(f"need at least 3 points, got {n}")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise CorrelationError("undefined correlation: constant series")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class CorrelationMatrix:
    metric_names: tuple[str, ...]
    values: tuple[tuple[float | None, ...], ...]  # None marks an undefined entry
    n: int

    def get(self, a: str, b: str) -> float | None:
        return self.values[self.metric_names.index(a)][self.metric_names.index(b)]


def metric_column(records: Sequence[MetricRecord], name: str) -> list[float]:
    column = []
    for rec in records:
        value = getattr(rec, name, None)
        if value is None:
            raise CorrelationError(f"record {rec.tokenizer_name!r} lacks metric {name!r}")
        column.append(float(value))
    return column


def correlation_matrix(
    records: Sequence[MetricRecord], metrics: Sequence[str] = DEFAULT_CORRELATION_METRICS
) -> CorrelationMatrix:
    if len(records) < 3:
        raise CorrelationError(f"correlation needs at least 3 records, got {len(records)}")
    columns = {m: metric_column(records, m) for m in metrics}
    constant = {m for m, col in columns.items() if max(col) == min(col)}
    rows = []
    for a in metrics:
        row = []
        for b in metrics:
            if a in constant or b in constant:
                row.append(None)
            elif a == b:
                row.append(1.0)
            else:
                row.append(pearson(columns[a], columns[b]))
        rows.append(tuple(row))
    return CorrelationMatrix(tuple(metrics), tuple(rows), len(records))


def _fmt_r(r: float | None) -> str:
    return UNDEFINED if r is None else f"{r:.4f}"


def matrix_long_csv(matrix: CorrelationMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric_a", "metric_b", "r", "n"])
    for i, a in enumerate(matrix.metric_names):
        for j, b in enumerate(matrix.metric_names):
            w.writerow([a, b, _fmt_r(matrix.values[i][j]), matrix.n])
    return buf.getvalue()


def matrix_table(matrix: CorrelationMatrix) -> str:
    names = matrix.metric_names
    header = "| r (n={}) | {} |".format(matrix.n, " | ".join(METRIC_LABELS.get(m, m) for m in names))
    lines = [header, "|" + "---|" * (len(names) + 1)]
    for name, row in zip(names, matrix.values):
        cells = " | ".join(UNDEFINED if r is None else f"{r:+.2f}" for r in row)
        lines.append(f"| {METRIC_LABELS.get(name, name)} | {cells} |")
    return "\n".join(lines) + "\n"


# --- leaderboard -----------------------------------------------------------


def _thousands(v) -> str:
    return f"{int(v):,}"


def _fixed(places: int):
    return lambda v: f"{float(v):.{places}f}"


_FORMATS = {
    "params_billions": _fixed(1),
    "mmlu_score": _fixed(2),
    "vocab_size": _thousands,
    "total_tokens": _thousands,
    "wall_seconds": _fixed(2),
    "unique_tokens": _thousands,
    "valid_unique": _thousands,
    "pure_unique": _thousands,
    "tr_pct": _fixed(2),
    "pure_pct": _fixed(2),
}

# tokenizers-as-rows layout
ROW_LAYOUT = (
    ("vocab_size", "Vocab Size"),
    ("total_tokens", "Token Count"),
    ("wall_seconds", "Time (s)"),
    ("unique_tokens", "Unique Tokens"),
    ("valid_unique", "Turkish Tokens"),
    ("tr_pct", "TR %"),
    ("pure_unique", "Pure Tokens"),
    ("pure_pct", "Pure %"),
)


def format_cell(record: MetricRecord, name: str) -> str:
    value = getattr(record, name)
    return "-" if value is None else _FORMATS[name](value)


def _markdown(rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(rows[0]) + " |", "|" + "---|" * len(rows[0])]
    lines += ["| " + " | ".join(r) + " |" for r in rows[1:]]
    return "\n".join(lines) + "\n"


def _csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def leaderboard_rows(records: Sequence[MetricRecord], by_tokenizer: bool = False) -> list[list[str]]:
    """Formatted grid, header row first.

    Default: one row per metric, one column per tokenizer (records order).
    ``by_tokenizer``: one row per tokenizer with count columns.
    """
    if not records:
        raise ValueError("no records to render")
    if by_tokenizer:
        rows = [["Tokenizer"] + [label for _, label in ROW_LAYOUT]]
        rows += [[r.tokenizer_name] + [format_cell(r, name) for name, _ in ROW_LAYOUT] for r in records]
        return rows
    rows = [["Metric"] + [r.tokenizer_name for r in records]]
    for name, label in METRIC_LABELS.items():
        rows.append([label] + [format_cell(r, name) for r in records])
    return rows


def render_leaderboard(records: Sequence[MetricRecord], by_tokenizer: bool = False) -> tuple[str, str]:
    """Markdown table text and the same grid as CSV."""
    rows = leaderboard_rows(records, by_tokenizer)
    return _markdown(rows), _csv(rows)


# --- plot data ---------------------------------------------------------------


def scatter_points(records: Sequence[MetricRecord]) -> list[dict]:
    return [
        {"x": r.tr_pct, "y": r.mmlu_score, "size": r.params_billions, "color": r.pure_pct, "label": r.tokenizer_name}
        for r in records
        if r.mmlu_score is not None and r.params_billions is not None
    ]


def emit_plot_data(
    records: Sequence[MetricRecord], metrics: Sequence[str] | None = None
) -> tuple[str, str]:
    """Heatmap CSV (long form) and scatter JSON for the given records.

    Metrics missing from any record are left out of the heatmap. The scatter
    document carries a warning instead of points when no record has both an
    MMLU score and a parameter count.
    """
    if not records:
        raise ValueError("no records")
    if metrics is None:
        metrics = [m for m in DEFAULT_CORRELATION_METRICS if all(getattr(r, m) is not None for r in records)]
    heatmap = matrix_long_csv(correlation_matrix(records, metrics))
    points = scatter_points(records)
    doc: dict = {"x": "tr_pct", "y": "mmlu_score", "size": "params_billions", "color": "pure_pct"}
    if points:
        doc["points"] = points
    else:
        doc["points"] = []
        doc["warning"] = "scatter omitted: no record has both mmlu_score and params_billions"
    return heatmap, json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


__all__ = [
    "CorrelationError",
    "CorrelationMatrix",
    "correlation_matrix",
    "emit_plot_data",
    "matrix_long_csv",
    "matrix_table",
    "pearson",
    "records_to_csv",
    "render_leaderboard",
    "scatter_points",
]
