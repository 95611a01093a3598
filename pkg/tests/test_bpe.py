import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tokbench.bpe import (
    MarkerPolicy,
    TokenizerError,
    TokenizerModel,
    byte_decode,
    byte_encode,
    count_tokens,
    decode,
    encode,
    encode_corpus,
    ingest_external_tokens,
    load_bpe,
    merge_piece,
    model_from_dict,
    pretokenize,
    save_bpe,
    write_token_dump,
)
from tokbench.corpus import CorpusRecord, corpus_text

from .oracles import naive_bpe

MINIMAL = {"model": {"type": "BPE", "vocab": {"a": 0, "b": 1, "ab": 2}, "merges": ["a b"]}}


def write_json(tmp_path, data, name="tok.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data, ensure_ascii=False), encoding="utf-8")
    return p


@pytest.fixture
def minimal(tmp_path):
    return load_bpe(write_json(tmp_path, MINIMAL))


class TestLoad:
    def test_minimal(self, minimal):
        assert minimal.vocab_size == 3
        assert not minimal.byte_level
        assert minimal.merges == (("a", "b"),)

    def test_list_style_merges(self, tmp_path):
        data = {"model": {"type": "BPE", "vocab": {"a": 0, "b": 1, "ab": 2}, "merges": [["a", "b"]]}}
        assert load_bpe(write_json(tmp_path, data)).merges == (("a", "b"),)

    def test_missing_merge_result(self, tmp_path):
        data = {"model": {"type": "BPE", "vocab": {"a": 0, "c": 1}, "merges": ["a c"]}}
        with pytest.raises(TokenizerError, match="'a', 'c'"):
            load_bpe(write_json(tmp_path, data))

    def test_duplicate_ids(self, tmp_path):
        data = {"model": {"type": "BPE", "vocab": {"a": 0, "b": 0}, "merges": []}}
        with pytest.raises(TokenizerError, match="duplicate id"):
            load_bpe(write_json(tmp_path, data))

    def test_non_bpe_rejected(self):
        with pytest.raises(TokenizerError, match="only BPE"):
            model_from_dict({"model": {"type": "Unigram", "vocab": []}})

    def test_byte_level_injects_base_bytes(self):
        m = model_from_dict({"pre_tokenizer": {"type": "ByteLevel"}, "model": {"vocab": {"a": 0}, "merges": []}})
        assert m.byte_level and m.marker_policy is MarkerPolicy.BYTE_LEVEL_SPACE
        assert m.vocab_size == 256

    def test_save_load_roundtrip(self, tmp_path, worked_model):
        save_bpe(worked_model, tmp_path / "m.json")
        again = load_bpe(tmp_path / "m.json")
        assert again.vocab == worked_model.vocab
        assert again.merges == worked_model.merges
        assert again.byte_level and again.marker_policy is worked_model.marker_policy

    def test_reference_trainer_vocab_size(self, tmp_path):
        tokenizers = pytest.importorskip("tokenizers")
        tok = tokenizers.Tokenizer(tokenizers.models.BPE())
        tok.pre_tokenizer = tokenizers.pre_tokenizers.Whitespace()
        trainer = tokenizers.trainers.BpeTrainer(vocab_size=100, show_progress=False)
        tok.train_from_iterator(["evlerimizden evler ev"], trainer)
        path = tmp_path / "hf.json"
        tok.save(str(path))
        model = load_bpe(path)
        assert model.vocab_size == tok.get_vocab_size()
        assert encode("evlerimizden", model).surfaces == tuple(tok.encode("evlerimizden").tokens)


class TestPretokenize:
    def test_two_words(self, toy_model):
        assert pretokenize("ev ler", toy_model) == ["ev", "Ġler"]

    def test_empty(self, toy_model, minimal):
        assert pretokenize("", toy_model) == []
        assert pretokenize("", minimal) == []

    def test_bahcede_byte_map(self, toy_model):
        # ç = C3 A7; 0xC3 -> 'Ã' (maps to itself), 0xA7 -> '§' (maps to itself)
        (piece,) = pretokenize("bahçede", toy_model)
        assert piece == "bahÃ§ede"
        assert byte_decode(piece) == "bahçede"

    def test_punctuation_boundary(self, toy_model):
        assert pretokenize("ev, bahçe?", toy_model) == ["ev", ",", "Ġbahçe".replace("ç", "Ã§"), "?"]

    def test_underscore_policy(self):
        m = TokenizerModel("u", {"a": 0}, (), marker_policy=MarkerPolicy.UNDERSCORE_PREFIX)
        assert pretokenize("a a  a", m) == ["a", "▁a", "▁a"]


class TestEncode:
    def test_one_merge(self, minimal):
        assert encode("ab", minimal).surfaces == ("ab",)

    def test_aab(self, minimal):
        seq = encode("aab", minimal)
        assert seq.surfaces == ("a", "ab")
        assert seq.token_ids == (0, 2)

    def test_evlerimizden(self, data_dir):
        model = load_bpe(data_dir / "evlerimizden_bpe.json")
        assert encode("evlerimizden", model).surfaces == ("ev", "ler", "imiz", "den")

    def test_unknown_symbol_without_unk(self, minimal):
        with pytest.raises(TokenizerError, match="'z'"):
            encode("az", minimal)

    def test_unknown_symbol_with_unk(self):
        m = model_from_dict({"model": {"vocab": {"a": 0, "<unk>": 1}, "merges": [], "unk_token": "<unk>"}})
        assert encode("az", m).token_ids == (0, 1)

    def test_deterministic(self, toy_model, mini_corpus):
        text = corpus_text(mini_corpus[0])
        assert encode(text, toy_model) == encode(text, toy_model)

    def test_matches_reference_encoder_per_word(self, data_dir, toy_model, mini_corpus):
        tokenizers = pytest.importorskip("tokenizers")
        hf = tokenizers.Tokenizer.from_file(str(data_dir / "toy_bpe_1000.json"))
        words = sorted({w for r in mini_corpus for w in corpus_text(r).split() if w.isalpha()})
        for word in words:
            assert list(encode(" " + word, toy_model).surfaces) == hf.encode(" " + word).tokens, word

    @settings(max_examples=300, deadline=None)
    @given(st.text(max_size=60))
    def test_round_trip(self, toy_model, text):
        assert decode(encode(text, toy_model).surfaces, toy_model) == text

    def test_byte_encode_inverse_table(self):
        assert byte_decode(byte_encode("İstanbul ğüşöç")) == "İstanbul ğüşöç"


@st.composite
def toy_vocab_and_text(draw):
    alphabet = draw(st.lists(st.sampled_from("abcd"), min_size=1, max_size=4, unique=True))
    tokens = list(alphabet)
    merges = []
    for _ in range(draw(st.integers(0, 12))):
        left = draw(st.sampled_from(tokens))
        right = draw(st.sampled_from(tokens))
        if (left, right) not in merges:
            merges.append((left, right))
            if left + right not in tokens:
                tokens.append(left + right)
    text = draw(st.text(alphabet="".join(alphabet), max_size=20))
    return tokens, merges, text


class TestMergeOrder:
    @settings(max_examples=300, deadline=None)
    @given(toy_vocab_and_text())
    def test_matches_naive_oracle(self, case):
        tokens, merges, text = case
        model = TokenizerModel("t", {t: i for i, t in enumerate(tokens)}, tuple(merges))
        assert list(merge_piece(list(text), model.ranks)) == naive_bpe(list(text), merges)

    def test_rank_beats_position(self):
        ranks = {("b", "c"): 0, ("a", "b"): 1}
        assert merge_piece(list("abc"), ranks) == ["a", "bc"]

    def test_overlapping_pairs_leftmost(self):
        assert merge_piece(list("aaa"), {("a", "a"): 0}) == ["aa", "a"]


class TestCorpus:
    def test_two_copies(self, minimal):
        records = [CorpusRecord("1", "a b"), CorpusRecord("2", "a b")]
        stats, timing = encode_corpus(records, minimal, repeats=3)
        assert stats.total_tokens == 4
        assert timing.tokens_emitted == 4 and timing.repeats == 3

    def test_empty(self, minimal):
        stats, timing = encode_corpus([], minimal, repeats=1)
        assert stats.total_tokens == 0
        assert timing.wall_seconds >= 0

    def test_repeats_validated(self, minimal):
        with pytest.raises(ValueError):
            encode_corpus([], minimal, repeats=0)

    def test_mini_corpus_equals_per_record_sum(self, toy_model, mini_corpus):
        stats, _ = encode_corpus(mini_corpus, toy_model, repeats=1)
        assert stats.total_tokens == sum(len(encode(corpus_text(r), toy_model)) for r in mini_corpus)
        # frozen from the reference encoder (tokenizers) over the same texts
        assert stats.total_tokens == 30348

    def test_error_carries_record_id(self, minimal):
        with pytest.raises(TokenizerError, match="'bad'"):
            encode_corpus([CorpusRecord("bad", "xyz")], minimal, repeats=1)

    def test_monotone(self, toy_model, mini_corpus):
        prev = 0
        for k in range(0, len(mini_corpus) + 1, 7):
            total = count_tokens(toy_model, mini_corpus[:k]).total_tokens
            assert total >= prev
            prev = total

    def test_parallel_matches_serial(self, toy_model, mini_corpus):
        serial = count_tokens(toy_model, mini_corpus, workers=1)
        parallel = count_tokens(toy_model, mini_corpus, workers=3)
        assert parallel.total_tokens == serial.total_tokens
        assert parallel.surface_counts == serial.surface_counts

    def test_partial_merge_associative_commutative(self, toy_model, mini_corpus):
        a, b, c = (count_tokens(toy_model, mini_corpus[i::3]) for i in range(3))
        left = a.merge(b).merge(c)
        right = c.merge(a.merge(b))
        assert left.total_tokens == right.total_tokens
        assert left.surface_counts == right.surface_counts


class TestExternalDump:
    def test_toy(self, tmp_path):
        p = tmp_path / "d.txt"
        p.write_text("toy 10\nev\nler\nev\n", encoding="utf-8")
        dump = ingest_external_tokens(p)
        assert (dump.name, dump.declared_vocab_size, dump.declared_wall_seconds) == ("toy", 10, None)
        assert dump.total_tokens == 3
        assert dump.unique_surfaces == {"ev", "ler"}

    def test_empty_token_section(self, tmp_path):
        p = tmp_path / "d.txt"
        p.write_text("toy 10\n", encoding="utf-8")
        dump = ingest_external_tokens(p)
        assert dump.total_tokens == 0 and dump.unique_surfaces == set()

    def test_missing_header(self, tmp_path):
        p = tmp_path / "d.txt"
        p.write_text("", encoding="utf-8")
        with pytest.raises(TokenizerError, match="header"):
            ingest_external_tokens(p)

    def test_empty_line(self, tmp_path):
        p = tmp_path / "d.txt"
        p.write_text("toy 10\nev\n\nler\n", encoding="utf-8")
        with pytest.raises(TokenizerError, match="line 3"):
            ingest_external_tokens(p)

    def test_header_options(self, tmp_path):
        p = tmp_path / "d.txt"
        write_token_dump(p, "gemma", 256000, ["▁ev", "ler"], wall_seconds=2.95, policy=MarkerPolicy.UNDERSCORE_PREFIX)
        dump = ingest_external_tokens(p)
        assert dump.declared_wall_seconds == 2.95
        assert dump.marker_policy is MarkerPolicy.UNDERSCORE_PREFIX
        assert dump.stats.surface_counts == {"▁ev": 1, "ler": 1}

    def test_third_party_dump_length(self, tmp_path, data_dir, mini_corpus):
        tokenizers = pytest.importorskip("tokenizers")
        hf = tokenizers.Tokenizer.from_file(str(data_dir / "toy_bpe_1000.json"))
        tokens = [t for r in mini_corpus for t in hf.encode(corpus_text(r)).tokens]
        p = tmp_path / "hf.txt"
        write_token_dump(p, "hf-toy", hf.get_vocab_size(), tokens, policy=MarkerPolicy.BYTE_LEVEL_SPACE)
        dump = ingest_external_tokens(p)
        assert dump.total_tokens == len(tokens)
        assert dump.unique_surfaces == set(tokens)
