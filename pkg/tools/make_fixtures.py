"""Regenerate the bundled BPE fixtures under src/tokbench/data/.

- toy_bpe_1000.json: byte-level BPE with exactly 1000 merges, trained on the
  mini-corpus with the HuggingFace ``tokenizers`` trainer.
- worked_example_bpe.json / evlerimizden_bpe.json: hand-built byte-level
  models whose merges produce a fixed target segmentation.

Run from the repo root. Requires ``tokenizers``.
"""

import json
from pathlib import Path

from tokbench.bpe import MarkerPolicy, TokenizerModel, byte_encode, bytes_to_unicode, encode, save_bpe
from tokbench.corpus import corpus_text, load_corpus

DATA = Path("src/tokbench/data")


def train_toy(n_merges=1000):
    from tokenizers import Tokenizer, decoders, models, pre_tokenizers, trainers

    tok = Tokenizer(models.BPE())
    tok.pre_tokenizer = pre_tokenizers.ByteLevel(add_prefix_space=False)
    tok.decoder = decoders.ByteLevel()
    trainer = trainers.BpeTrainer(
        vocab_size=256 + n_merges,
        initial_alphabet=pre_tokenizers.ByteLevel.alphabet(),
        show_progress=False,
    )
    texts = [corpus_text(r) for r in load_corpus(DATA / "mini_corpus.jsonl")]
    tok.train_from_iterator(texts, trainer)
    data = json.loads(tok.to_str())
    assert len(data["model"]["merges"]) == n_merges, len(data["model"]["merges"])
    (DATA / "toy_bpe_1000.json").write_text(json.dumps(data, ensure_ascii=False), encoding="utf-8")


def chain_model(name, targets):
    """Byte-level model whose merges build each target token left to right."""
    vocab = {ch: i for i, ch in enumerate(bytes_to_unicode().values())}
    merges = []
    for target in targets:
        mapped = byte_encode(target)
        left = mapped[0]
        for ch in mapped[1:]:
            pair = (left, ch)
            if pair not in merges:
                merges.append(pair)
            left += ch
            vocab.setdefault(left, len(vocab))
    return TokenizerModel(name, vocab, tuple(merges), byte_level=True,
                          marker_policy=MarkerPolicy.BYTE_LEVEL_SPACE)


def build_worked_example():
    sentence = "Çocuklar bahçede oynayacak ve bahçede gülecek"
    model = chain_model("worked-example", ["Çocuklar", " bahçe", "de", " oynayacak", " ve", " gül", "ecek"])
    got = [s for s in encode(sentence, model).surfaces]
    expected = [byte_encode(t) for t in ["Çocuklar", " bahçe", "de", " oynayacak", " ve", " bahçe", "de", " gül", "ecek"]]
    assert got == expected, got
    save_bpe(model, DATA / "worked_example_bpe.json")


def build_evlerimizden():
    model = chain_model("evlerimizden", ["ev", "ler", "imiz", "den"])
    got = list(encode("evlerimizden", model).surfaces)
    assert got == ["ev", "ler", "imiz", "den"], got
    save_bpe(model, DATA / "evlerimizden_bpe.json")


if __name__ == "__main__":
    train_toy()
    build_worked_example()
    build_evlerimizden()
    print("fixtures written")
