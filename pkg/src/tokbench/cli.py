"""Command-line entry point: benchmark, analyze, correlate, report."""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import os
import platform
import re
import shutil
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .bpe import TokenizerError, ingest_external_tokens, load_bpe
from .corpus import CorpusError, compute_stats, load_corpus
from .metrics import EvalConfig, MetricRecord, UndefinedMetricError, evaluate_tokenizer, records_from_csv, records_to_csv
from .morphology import ResourceError, default_resource_path, load_resource
from .report import (
    DEFAULT_CORRELATION_METRICS,
    CorrelationError,
    correlation_matrix,
    emit_plot_data,
    matrix_table,
    render_leaderboard,
)
from .surface import turkish_fold

log = logging.getLogger("tokbench")

OUTPUT_DIR_ENV = "TOKBENCH_OUTPUT_DIR"
DATA_DIR = Path(__file__).parent / "data"
BUNDLED_TABLES = {"table1": DATA_DIR / "table1.csv", "table2": DATA_DIR / "table2.csv"}
TOKENIZER_KINDS = ("bpe-file", "external-dump")


class ManifestError(ValueError):
    pass


@dataclass
class TokenizerSpec:
    name: str
    kind: str
    path: Path
    mmlu_score: float | None = None
    params_billions: float | None = None


@dataclass
class RunManifest:
    corpus_path: Path | None
    corpus_format: str
    morphology_resource: Path
    tokenizers: list[TokenizerSpec]
    repeats: int = 5
    alpha_only: bool = False
    count_bound_morphemes_as_pure: bool = False
    workers: int = 1
    output_dir: Path = field(default_factory=lambda: Path("tokbench-output"))

    def eval_config(self) -> EvalConfig:
        return EvalConfig(
            repeats=self.repeats,
            alpha_only=self.alpha_only,
            count_bound_morphemes_as_pure=self.count_bound_morphemes_as_pure,
            workers=self.workers,
        )


def _resolve(base: Path, value) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def parse_manifest(data: dict, base: Path, overrides: dict | None = None) -> RunManifest:
    """Validate a manifest dict. Relative paths resolve against ``base``."""
    if not isinstance(data, dict):
        raise ManifestError("manifest must be a JSON object")
    options = dict(data.get("options", {}))
    if os.environ.get(OUTPUT_DIR_ENV):
        options["output_dir"] = os.environ[OUTPUT_DIR_ENV]
    options.update({k: v for k, v in (overrides or {}).items() if v is not None})

    corpus = data.get("corpus")
    corpus_format = "jsonl-records"
    corpus_path = None
    if isinstance(corpus, dict):
        corpus_format = corpus.get("format", corpus_format)
        corpus = corpus.get("path")
    if corpus is not None:
        corpus_path = _resolve(base, corpus)
        if not corpus_path.is_file():
            raise ManifestError(f"corpus not found: {corpus_path}")
    if corpus_format not in ("jsonl-records", "plain-text"):
        raise ManifestError(f"unknown corpus format {corpus_format!r}")

    resource = _resolve(base, data["morphology_resource"]) if data.get("morphology_resource") else default_resource_path()
    if not resource.is_file():
        raise ManifestError(f"morphology resource not found: {resource}")

    entries = data.get("tokenizers") or []
    if not entries:
        raise ManifestError("manifest lists no tokenizers")
    specs = []
    seen = set()
    for entry in entries:
        name = entry.get("name")
        kind = entry.get("kind", "bpe-file")
        if not name:
            raise ManifestError("tokenizer entry without a name")
        if name in seen:
            raise ManifestError(f"duplicate tokenizer name {name!r}")
        seen.add(name)
        if kind not in TOKENIZER_KINDS:
            raise ManifestError(f"{name}: kind must be one of {TOKENIZER_KINDS}")
        path = _resolve(base, entry.get("path", ""))
        if not path.is_file():
            raise ManifestError(f"{name}: file not found: {path}")
        if kind == "bpe-file" and corpus_path is None:
            raise ManifestError(f"{name}: bpe-file tokenizers need a corpus")
        meta = entry.get("metadata", {})
        specs.append(TokenizerSpec(name, kind, path, meta.get("mmlu_score"), meta.get("params_billions")))

    repeats = int(options.get("repeats", 5))
    if repeats < 1:
        raise ManifestError("options.repeats must be >= 1")
    output_dir = options.get("output_dir", "tokbench-output")
    return RunManifest(
        corpus_path=corpus_path,
        corpus_format=corpus_format,
        morphology_resource=resource,
        tokenizers=specs,
        repeats=repeats,
        alpha_only=bool(options.get("alpha_only", False)),
        count_bound_morphemes_as_pure=bool(options.get("count_bound_morphemes_as_pure", False)),
        workers=max(1, int(options.get("workers", 1))),
        output_dir=_resolve(Path.cwd(), output_dir),
    )


def load_manifest(path: str | Path, overrides: dict | None = None) -> RunManifest:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from None
    return parse_manifest(data, path.parent, overrides)


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name)


def hardware_description() -> dict:
    return {
        "platform": platform.platform(),
        "machine": platform.machine(),
        "processor": platform.processor(),
        "cpu_count": os.cpu_count(),
        "python": platform.python_version(),
    }


def write_outputs_atomically(output_dir: Path, files: dict[str, str]) -> None:
    """Write every file into a sibling temp dir, then swap it into place."""
    output_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{output_dir.name}.", dir=output_dir.parent))
    try:
        for rel, content in files.items():
            target = staging / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(content, encoding="utf-8")
        backup = None
        if output_dir.exists():
            backup = output_dir.with_name(f".{output_dir.name}.old")
            if backup.exists():
                shutil.rmtree(backup)
            output_dir.rename(backup)
        staging.rename(output_dir)
        if backup is not None:
            shutil.rmtree(backup)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise


def run_benchmark(manifest: RunManifest) -> tuple[list[MetricRecord], dict[str, str]]:
    started = dt.datetime.now(dt.timezone.utc)
    resource = load_resource(manifest.morphology_resource)
    corpus = list(load_corpus(manifest.corpus_path, manifest.corpus_format)) if manifest.corpus_path else []
    config = manifest.eval_config()

    records = []
    for entry in manifest.tokenizers:
        try:
            if entry.kind == "bpe-file":
                source = load_bpe(entry.path, name=entry.name)
            else:
                source = ingest_external_tokens(entry.path)
            record = evaluate_tokenizer(source, corpus, resource, config, entry.mmlu_score, entry.params_billions)
        except (TokenizerError, UndefinedMetricError, CorpusError, ResourceError) as exc:
            raise RuntimeError(f"tokenizer {entry.name!r}: {exc}") from exc
        record.tokenizer_name = entry.name
        records.append(record)

    files = {}
    for rec in records:
        stem = _safe_name(rec.tokenizer_name)
        files[f"metrics/{stem}.json"] = rec.to_json()
        files[f"metrics/{stem}.csv"] = records_to_csv([rec])
    files["records.csv"] = records_to_csv(records)
    table_md, table_csv = render_leaderboard(records)
    files["leaderboard.md"] = table_md
    files["leaderboard.csv"] = table_csv
    stats = compute_stats(corpus)
    config_dict = asdict(manifest)
    config_dict = json.loads(json.dumps(config_dict, default=str))
    files["run_metadata.json"] = json.dumps(
        {
            "tool": "tokbench",
            "version": __version__,
            "config": config_dict,
            "resource_version": resource.version,
            "corpus_stats": asdict(stats),
            "hardware": hardware_description(),
            "started": started.isoformat(),
            "finished": dt.datetime.now(dt.timezone.utc).isoformat(),
        },
        indent=2,
        ensure_ascii=False,
    ) + "\n"
    return records, files


def read_records(source: str) -> list[MetricRecord]:
    """Records from a CSV file, a directory (records.csv or *.json), or a bundled table name."""
    if source in BUNDLED_TABLES:
        return records_from_csv(BUNDLED_TABLES[source].read_text(encoding="utf-8"))
    path = Path(source)
    if path.is_dir():
        if (path / "records.csv").is_file():
            return records_from_csv((path / "records.csv").read_text(encoding="utf-8"))
        json_files = sorted(path.glob("*.json")) or sorted((path / "metrics").glob("*.json"))
        return [MetricRecord.from_dict(json.loads(p.read_text(encoding="utf-8"))) for p in json_files]
    return records_from_csv(path.read_text(encoding="utf-8"))


# --- commands ----------------------------------------------------------------


def cmd_benchmark(args) -> int:
    overrides = {
        "repeats": args.repeats,
        "alpha_only": True if args.alpha_only else None,
        "count_bound_morphemes_as_pure": True if args.count_bound_morphemes_as_pure else None,
        "output_dir": args.output_dir,
        "workers": args.workers,
    }
    manifest = load_manifest(args.manifest, overrides)
    records, files = run_benchmark(manifest)
    write_outputs_atomically(manifest.output_dir, files)
    if args.json:
        print(json.dumps({"output_dir": str(manifest.output_dir), "records": [r.to_dict() for r in records]},
                         indent=2, ensure_ascii=False))
    else:
        print(files["leaderboard.md"], end="")
        print(f"wrote {len(files)} files to {manifest.output_dir}")
    return 0


def cmd_analyze(args) -> int:
    resource = load_resource(args.resource) if args.resource else load_resource(default_resource_path())
    folded = turkish_fold(args.token)
    p = resource.parse(folded)
    if args.json:
        out = {"token": args.token, "folded": folded, "parse": None, "valid": False, "pure": False}
        if p is not None:
            out.update(
                parse={"root": p.root, "lemma": p.root_form, "suffixes": [list(s) for s in p.suffix_chain]},
                valid=p.is_valid_word,
                pure=p.is_pure,
            )
        print(json.dumps(out, ensure_ascii=False))
        return 0
    if p is None:
        print(f"{args.token}: NO-PARSE")
        print("valid: no\npure: no")
        return 0
    tags = " ".join(r for r, _ in p.suffix_chain) or ("atomic" if p.is_pure else "root")
    print(f"{args.token}: {' + '.join(p.segments)} [{tags}]")
    print(f"valid: {'yes' if p.is_valid_word else 'no'}")
    print(f"pure: {'yes' if p.is_pure else 'no'}")
    return 0


def _output_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get(OUTPUT_DIR_ENV) or "tokbench-output")


def cmd_correlate(args) -> int:
    records = read_records(args.source)
    if len(records) < 3:
        raise CorrelationError(f"correlation needs at least 3 records, got {len(records)}")
    metrics = args.metrics.split(",") if args.metrics else [
        m for m in DEFAULT_CORRELATION_METRICS if all(getattr(r, m) is not None for r in records)
    ]
    matrix = correlation_matrix(records, metrics)
    heatmap, scatter = emit_plot_data(records, metrics)
    table = matrix_table(matrix)
    out = _output_dir(args.output_dir)
    write_outputs_atomically(out, {"heatmap.csv": heatmap, "scatter.json": scatter, "correlation.md": table})
    if args.json:
        print(json.dumps({"n": matrix.n, "metrics": list(matrix.metric_names), "r": [list(row) for row in matrix.values],
                          "output_dir": str(out)}, indent=2))
    else:
        print(table, end="")
        print(f"wrote heatmap.csv, scatter.json, correlation.md to {out}")
    return 0


def cmd_report(args) -> int:
    records = read_records(args.source)
    table_md, table_csv = render_leaderboard(records, by_tokenizer=args.by_tokenizer)
    if args.json:
        print(json.dumps([r.to_dict() for r in records], indent=2, ensure_ascii=False))
    else:
        print(table_csv if args.csv else table_md, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tokbench", description="Tokenizer linguistic-fidelity benchmark")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("benchmark", help="evaluate the tokenizers listed in a run manifest")
    p.add_argument("manifest")
    p.add_argument("--repeats", type=int)
    p.add_argument("--alpha-only", action="store_true", help="count only alphabetic tokens in %%TR/%%Pure")
    p.add_argument("--count-bound-morphemes-as-pure", action="store_true")
    p.add_argument("--workers", type=int)
    p.add_argument("--output-dir", help=f"overrides the manifest (and ${OUTPUT_DIR_ENV})")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("analyze", help="morphological analysis of one token")
    p.add_argument("token")
    p.add_argument("--resource", help="morphology resource JSON (default: bundled)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("correlate", help="Pearson matrix and plot data over metric records")
    p.add_argument("source", help="records CSV, output directory, or 'table1'/'table2'")
    p.add_argument("--metrics", help="comma-separated metric fields")
    p.add_argument("--output-dir")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("report", help="render a leaderboard table")
    p.add_argument("source", help="records CSV, output directory, or 'table1'/'table2'")
    p.add_argument("--by-tokenizer", action="store_true", help="one row per tokenizer")
    p.add_argument("--csv", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ManifestError, CorpusError, TokenizerError, ResourceError, CorrelationError,
            UndefinedMetricError, RuntimeError, OSError, ValueError) as exc:
        print(f"tokbench {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
