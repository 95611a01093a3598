import json
import random

import pytest

from tokbench.bpe import MarkerPolicy, encode, ingest_external_tokens, write_token_dump
from tokbench.corpus import CorpusRecord, corpus_text
from tokbench.metrics import (
    RECORD_COLUMNS,
    EvalConfig,
    MetricRecord,
    UndefinedMetricError,
    evaluate_tokenizer,
    pure_percentage,
    records_from_csv,
    records_to_csv,
    tr_percentage,
)
from tokbench.morphology import parse
from tokbench.surface import normalize

from .conftest import WORKED_SENTENCE

FAST = EvalConfig(repeats=1)


class TestPercentages:
    def test_worked_tr(self):
        assert round(tr_percentage(5, 7), 1) == pytest.approx(71.4, abs=0.05)

    def test_worked_pure(self):
        assert round(pure_percentage(3, 7), 1) == pytest.approx(42.9, abs=0.05)

    @pytest.mark.parametrize("fn", [tr_percentage, pure_percentage])
    def test_bounds(self, fn):
        assert fn(0, 9) == 0.0
        assert fn(9, 9) == 100.0

    @pytest.mark.parametrize("fn", [tr_percentage, pure_percentage])
    def test_zero_denominator(self, fn):
        with pytest.raises(UndefinedMetricError):
            fn(0, 0)


class TestEvaluate:
    def test_worked_example(self, worked_model, resource):
        rec = evaluate_tokenizer(worked_model, [CorpusRecord("s", WORKED_SENTENCE)], resource, FAST)
        assert (rec.unique_tokens, rec.valid_unique, rec.pure_unique) == (7, 5, 3)
        assert rec.total_tokens == 9
        assert rec.vocab_size == worked_model.vocab_size

    def test_gemma_dump_echoes_declared_values(self, tmp_path, resource):
        surfaces = ["▁ev", "ler", "▁bahçe", "de", "?"]
        p = tmp_path / "gemma.txt"
        write_token_dump(p, "gemma-2", 256000, (surfaces[i % 5] for i in range(497015)), wall_seconds=2.95,
                         policy=MarkerPolicy.UNDERSCORE_PREFIX)
        rec = evaluate_tokenizer(ingest_external_tokens(p), None, resource, FAST, mmlu_score=72.10, params_billions=27.2)
        assert rec.vocab_size == 256000
        assert rec.total_tokens == 497015
        assert rec.wall_seconds == 2.95
        assert (rec.mmlu_score, rec.params_billions) == (72.10, 27.2)
        # ev, ler, bahçe, de, ? -> valid: ev, bahçe; pure: ev, bahçe
        assert (rec.unique_tokens, rec.valid_unique, rec.pure_unique) == (5, 2, 2)

    def test_whitespace_only_is_undefined(self, tmp_path, resource):
        p = tmp_path / "ws.txt"
        write_token_dump(p, "ws", 10, ["Ġ", "ĠĠ", "Ċ"], policy=MarkerPolicy.BYTE_LEVEL_SPACE)
        with pytest.raises(UndefinedMetricError):
            evaluate_tokenizer(ingest_external_tokens(p), None, resource, FAST)

    def test_whitespace_counted_when_enabled(self, tmp_path, resource):
        p = tmp_path / "ws.txt"
        write_token_dump(p, "ws", 10, ["Ġ", "ev"], policy=MarkerPolicy.BYTE_LEVEL_SPACE)
        dump = ingest_external_tokens(p)
        assert evaluate_tokenizer(dump, None, resource, FAST).unique_tokens == 1
        assert evaluate_tokenizer(dump, None, resource, EvalConfig(include_whitespace=True)).unique_tokens == 2

    def test_alpha_only(self, tmp_path, resource):
        p = tmp_path / "d.txt"
        write_token_dump(p, "d", 10, ["ev", ",", "1923", "ler"])
        dump = ingest_external_tokens(p)
        default = evaluate_tokenizer(dump, None, resource, FAST)
        alpha = evaluate_tokenizer(dump, None, resource, EvalConfig(alpha_only=True))
        assert default.unique_tokens == 4 and alpha.unique_tokens == 2
        assert default.valid_unique == alpha.valid_unique == 1

    def test_case_preserved_for_uniqueness(self, tmp_path, resource):
        p = tmp_path / "d.txt"
        write_token_dump(p, "d", 10, ["Ev", "ev", "EV"])
        rec = evaluate_tokenizer(ingest_external_tokens(p), None, resource, FAST)
        assert rec.unique_tokens == 3 and rec.valid_unique == 3

    def test_marker_variants_collapse(self, tmp_path, resource):
        p = tmp_path / "d.txt"
        write_token_dump(p, "d", 10, ["ler", "Ġler", "Ġev"], policy=MarkerPolicy.BYTE_LEVEL_SPACE)
        assert evaluate_tokenizer(ingest_external_tokens(p), None, resource, FAST).unique_tokens == 2

    def test_bound_morpheme_flag(self, worked_model, resource):
        cfg = EvalConfig(repeats=1, count_bound_morphemes_as_pure=True)
        rec = evaluate_tokenizer(worked_model, [CorpusRecord("s", WORKED_SENTENCE)], resource, cfg)
        # "de" and "ecek" join bahçe, gül, ve
        assert rec.pure_unique == 5 and rec.valid_unique == 5

    def test_missing_resource(self, worked_model):
        with pytest.raises(ValueError):
            evaluate_tokenizer(worked_model, [], None, FAST)

    def test_matches_naive_recount(self, toy_model, resource, mini_corpus):
        rec = evaluate_tokenizer(toy_model, mini_corpus, resource, FAST)
        unique = {}
        for r in mini_corpus:
            for s in encode(corpus_text(r), toy_model).surfaces:
                cand = normalize(s, toy_model.marker_policy)
                if cand.clean_surface.strip():
                    unique[cand.clean_surface] = cand
        valid = [c for c in unique.values() if c.clean_surface.isalpha() and parse(c.folded, resource)]
        pure = [c for c in valid if parse(c.folded, resource).is_pure]
        assert (rec.unique_tokens, rec.valid_unique, rec.pure_unique) == (len(unique), len(valid), len(pure))

    def test_duplication_and_permutation(self, toy_model, resource, mini_corpus):
        base = evaluate_tokenizer(toy_model, mini_corpus[:10], resource, FAST)
        doubled = evaluate_tokenizer(toy_model, mini_corpus[:10] * 2, resource, FAST)
        shuffled = mini_corpus[:10]
        random.Random(3).shuffle(shuffled)
        perm = evaluate_tokenizer(toy_model, shuffled, resource, FAST)
        assert doubled.total_tokens == 2 * base.total_tokens
        for other in (doubled, perm):
            assert (other.unique_tokens, other.tr_pct, other.pure_pct) == (base.unique_tokens, base.tr_pct, base.pure_pct)


class TestRecord:
    def test_violations(self):
        ok = MetricRecord("t", 10, 5, 4, 50.0, 25.0, valid_unique=2, pure_unique=1)
        assert ok.violations() == []
        bad = MetricRecord("t", 10, 5, 4, 50.0, 75.0, valid_unique=2, pure_unique=3)
        assert "pure_unique > valid_unique" in bad.violations()
        assert "pure_pct > tr_pct" in bad.violations()

    def test_json_roundtrip_and_column_order(self):
        rec = MetricRecord("t", 10, 5, 4, 50.0, 25.0, wall_seconds=0.5, valid_unique=2, pure_unique=1, mmlu_score=70.0)
        d = json.loads(rec.to_json())
        assert tuple(d) == RECORD_COLUMNS
        assert MetricRecord.from_dict(d) == rec

    def test_csv_roundtrip(self):
        recs = [MetricRecord("a,b", 10, 5, 4, 50.0, 25.0, wall_seconds=0.1 + 0.2, valid_unique=2, pure_unique=1),
                MetricRecord("c", 3, 1, 1, 100.0, 0.0)]
        text = records_to_csv(recs)
        assert text.splitlines()[0] == ",".join(RECORD_COLUMNS)
        assert '"a,b"' in text
        assert records_from_csv(text) == recs

    def test_csv_thousands_separator(self):
        text = ",".join(RECORD_COLUMNS) + '\ngemma-2,27.2,72.10,"256,000","497,015",2.95,"6,383",48.63,37.05,,\n'
        (rec,) = records_from_csv(text)
        assert (rec.vocab_size, rec.total_tokens, rec.unique_tokens) == (256000, 497015, 6383)
