"""Regenerate the bundled mini-corpus (src/tokbench/data/mini_corpus.jsonl).

Deterministic: seeded RNG over the bundled morphology resource, plus a few
hand-written exam-style questions. Run from the repo root.
"""

import json
import random
from pathlib import Path

from tokbench.morphology import default_resource

OUT = Path("src/tokbench/data/mini_corpus.jsonl")
N_RECORDS = 50
TARGET_BYTES = 2150

SEED_QUESTIONS = [
    ("Hangi organ karaciğerin görevini destekler?", ["Kalp", "Akciğer", "Böbrek", "Dalak"], "biyoloji"),
    ("Çocuklar bahçede oynayacak ve bahçede gülecek cümlesinde kaç isim vardır?", ["İki", "Üç", "Dört", "Beş"], "dil"),
    ("Aşağıdakilerden hangisi bir gezegen değildir?", ["Güneş", "Dünya", "Mars", "Venüs"], "fizik"),
    ("Evlerimizden okula giden yol hangisidir?", ["Kısa yol", "Uzun yol", "Dağ yolu", "Deniz yolu"], "coğrafya"),
    ("İstanbul hangi kıtalar arasında yer alır?", ["Asya ve Avrupa", "Afrika ve Asya", "Avrupa ve Afrika", "Amerika ve Asya"], "coğrafya"),
]
FILLER = ["ve", "ile", "için", "gibi", "daha", "çok", "bu", "bir", "en", "her", "ama", "değil", "var", "yok"]
PUNCT = [",", ".", "?", ";", ":"]
NAMES = ["Ankara", "İzmir", "Atatürk", "Mars", "Venüs", "Osmanlı", "Kalbur", "1923", "2024", "%48", "TR-MMLU"]


def inflect(rng, resource, root):
    rest_rules = list(resource.suffixes)
    surface = root.form
    prev = None
    chain = []
    for _ in range(rng.choice([0, 1, 1, 2, 2, 3])):
        options = []
        for rule in rest_rules:
            for allo in rule.allomorphs:
                stem = surface
                alt_used = False
                if not chain and root.alt and allo[0] in "aeıioöuü":
                    stem = root.alt[0]
                    alt_used = True
                if resource.admits(stem, allo, rule, prev, root):
                    options.append((rule, allo, stem, alt_used))
        if not options:
            break
        rule, allo, stem, _ = rng.choice(options)
        chain.append((rule.id, allo))
        surface = stem + allo
        prev = rule.id
    if resource.parse(surface) is None:
        raise RuntimeError(f"generated unparseable form {surface!r} from {root.form} {chain}")
    return surface


def sentence(rng, resource, roots):
    words = []
    for _ in range(rng.randint(6, 14)):
        r = rng.random()
        if r < 0.15:
            words.append(rng.choice(FILLER))
        elif r < 0.2:
            words.append(rng.choice(NAMES))
        else:
            words.append(inflect(rng, resource, rng.choice(roots)))
    words[0] = words[0][:1].upper() + words[0][1:]
    text = " ".join(words)
    if rng.random() < 0.3:
        i = text.rfind(" ", 0, len(text) // 2)
        if i > 0:
            text = text[:i] + "," + text[i:]
    return text + rng.choice(PUNCT[1:3])


def main():
    rng = random.Random(20240601)
    resource = default_resource()
    roots = sorted(resource.roots.values(), key=lambda r: r.form)
    lines = []
    for i in range(N_RECORDS):
        if i < len(SEED_QUESTIONS):
            q, choices, subject = SEED_QUESTIONS[i]
            parts = [q]
        else:
            parts = []
            choices = None
            subject = rng.choice(["tarih", "biyoloji", "fizik", "coğrafya", "edebiyat", "ekonomi"])
        while len(" ".join(parts).encode("utf-8")) < TARGET_BYTES:
            parts.insert(len(parts) - (1 if i < len(SEED_QUESTIONS) else 0), sentence(rng, resource, roots))
        if choices is None:
            parts.append(sentence(rng, resource, roots)[:-1] + "?")
            choices = [inflect(rng, resource, rng.choice(roots)).capitalize() for _ in range(4)]
        record = {"id": f"q{i + 1:02d}", "subject": subject, "question": " ".join(parts), "choices": choices}
        lines.append(json.dumps(record, ensure_ascii=False))
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({OUT.stat().st_size} bytes, {len(lines)} records)")


if __name__ == "__main__":
    main()
