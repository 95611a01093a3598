"""Rule-based Turkish morphology: word validity and purity checks.

A resource file lists roots and suffix rules::

    {
      "version": "...",
      "roots": [{"form": "çocuk", "atomic": true, "pos": "noun", "alt": ["çocuğ"]}],
      "suffixes": [{"id": "PLURAL", "allomorphs": ["lar", "ler"], "follows": ["ROOT.noun"]}]
    }

``follows`` names the rules allowed immediately before a suffix; ``ROOT``
admits any root and ``ROOT.<pos>`` only roots of that part of speech.
``alt`` forms (consonant alternation, k -> ğ etc.) are used only before a
vowel-initial suffix, and a root that has alternates must use one there.
Suffixes with ``"harmonic": false`` (e.g. ``ki``) skip vowel harmony.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

VOWELS = frozenset("aeıioöuü")
BACK_VOWELS = frozenset("aıou")
ROUNDED_VOWELS = frozenset("oöuü")
VOICELESS = frozenset("fstkçşhp")
# suffix-initial consonants that alternate with voicing of the preceding sound
_VOICING_PAIRS = {"d": "t", "t": "d", "c": "ç", "ç": "c"}

ROOT = "ROOT"


class ResourceError(ValueError):
    """Invalid morphology resource."""


@dataclass(frozen=True)
class Root:
    form: str
    atomic: bool = True
    pos: tuple[str, ...] = ("noun",)
    alt: tuple[str, ...] = ()


@dataclass(frozen=True)
class SuffixRule:
    id: str
    allomorphs: tuple[str, ...]
    follows: frozenset[str]
    harmonic: bool = True

    def __post_init__(self):
        if not self.allomorphs:
            raise ResourceError(f"suffix {self.id}: no allomorphs")
        if any(not a for a in self.allomorphs):
            raise ResourceError(f"suffix {self.id}: empty allomorph")
        if len(set(self.allomorphs)) != len(self.allomorphs):
            raise ResourceError(f"suffix {self.id}: duplicate allomorphs")
        if not self.follows:
            raise ResourceError(f"suffix {self.id}: empty 'follows'")


@dataclass(frozen=True)
class Parse:
    root: str
    suffix_chain: tuple[tuple[str, str], ...]
    is_valid_word: bool
    is_pure: bool
    root_form: str = ""

    @property
    def segments(self) -> list[str]:
        return [self.root] + [a for _, a in self.suffix_chain]


def _last_vowel(s: str) -> str | None:
    for ch in reversed(s):
        if ch in VOWELS:
            return ch
    return None


def _first_vowel(s: str) -> str | None:
    for ch in s:
        if ch in VOWELS:
            return ch
    return None


def check_vowel_harmony(stem: str, allomorph: str) -> bool:
    """Does the allomorph's first vowel agree with the stem's last vowel?

    Low suffix vowels (a/e) follow front/back harmony; high ones (ı/i/u/ü)
    follow front/back and rounding. Stems or suffixes without a vowel pass,
    as do suffixes whose first vowel is o/ö (invariant, e.g. -yor).
    """
    sv = _last_vowel(stem)
    av = _first_vowel(allomorph)
    if sv is None or av is None:
        return True
    back = sv in BACK_VOWELS
    if av in "ae":
        return av == ("a" if back else "e")
    if av in "ıiuü":
        rounded = sv in ROUNDED_VOWELS
        expected = {(True, False): "ı", (False, False): "i", (True, True): "u", (False, True): "ü"}[(back, rounded)]
        return av == expected
    return True


def check_junction(stem: str, allomorph: str, rule: SuffixRule) -> bool:
    """Buffer-consonant, dropped-vowel and voicing constraints at a morpheme boundary."""
    last = stem[-1]
    first = allomorph[0]
    stem_vowel_final = last in VOWELS
    if first in VOWELS:
        # hiatus is repaired by a buffer consonant or a dropped vowel
        return not stem_vowel_final
    rest = allomorph[1:]
    forms = rule.allomorphs
    # sı/yla/nın: buffer consonant before a form that also occurs bare; m/r/miz: vowel dropped
    buffered = bool(rest) and rest in forms
    dropped = any(f[0] in VOWELS and f[1:] == allomorph for f in forms)
    if (buffered or dropped) and not stem_vowel_final:
        return False
    # la (vs yla): the bare form needs a consonant before it
    if stem_vowel_final and any(f[0] not in VOWELS and f[1:] == allomorph for f in forms):
        return False
    partner = _VOICING_PAIRS.get(first)
    if partner and partner + rest in forms:
        voiceless_initial = first in "tç"
        return voiceless_initial == (last in VOICELESS)
    return True


class MorphologyResource:
    """Immutable lexicon + suffix inventory with prefix and allomorph indexes."""

    def __init__(self, roots: Iterable[Root], suffixes: Iterable[SuffixRule], version: str = "unversioned"):
        by_form: dict[str, Root] = {}
        for root in roots:
            if root.form != root.form.lower() or not root.form:
                raise ResourceError(f"root {root.form!r} must be a nonempty folded form")
            prev = by_form.get(root.form)
            if prev is not None:
                if prev.atomic != root.atomic:
                    raise ResourceError(f"root {root.form!r} listed with conflicting atomic flags")
                root = Root(root.form, root.atomic, tuple(dict.fromkeys(prev.pos + root.pos)),
                            tuple(dict.fromkeys(prev.alt + root.alt)))
            by_form[root.form] = root
        if not by_form:
            raise ResourceError("resource has no roots")
        self.roots: dict[str, Root] = by_form
        self.suffixes: tuple[SuffixRule, ...] = tuple(suffixes)
        ids = [s.id for s in self.suffixes]
        if len(set(ids)) != len(ids):
            raise ResourceError("duplicate suffix rule ids")
        self.version = version

        # surface (form or alt) -> [(root, is_alt)]
        self._surfaces: dict[str, list[tuple[Root, bool]]] = {}
        for root in by_form.values():
            self._surfaces.setdefault(root.form, []).append((root, False))
            for alt in root.alt:
                self._surfaces.setdefault(alt, []).append((root, True))
        self._trie: dict = {}
        for surface in self._surfaces:
            node = self._trie
            for ch in surface:
                node = node.setdefault(ch, {})
            node[None] = surface
        self._by_first: dict[str, list[tuple[SuffixRule, str]]] = {}
        for rule in self.suffixes:
            for allo in rule.allomorphs:
                self._by_first.setdefault(allo[0], []).append((rule, allo))
        self.allomorph_set = frozenset(a for r in self.suffixes for a in r.allomorphs)
        self._cache: dict[str, Parse | None] = {}

    def __eq__(self, other):
        if not isinstance(other, MorphologyResource):
            return NotImplemented
        return (self.roots, set(self.suffixes), self.version) == (other.roots, set(other.suffixes), other.version)

    __hash__ = None

    def root_prefixes(self, token: str) -> list[str]:
        """Lexicon surfaces that are prefixes of ``token``, longest first."""
        found = []
        node = self._trie
        for ch in token:
            node = node.get(ch)
            if node is None:
                break
            if None in node:
                found.append(node[None])
        return found[::-1]

    def entries(self, surface: str) -> list[tuple[Root, bool]]:
        return self._surfaces.get(surface, [])

    def licensed(self, rule: SuffixRule, prev: str | None, root: Root) -> bool:
        if prev is None:
            return ROOT in rule.follows or any(f"{ROOT}.{p}" in rule.follows for p in root.pos)
        return prev in rule.follows

    def admits(self, stem: str, allomorph: str, rule: SuffixRule, prev: str | None, root: Root) -> bool:
        if not self.licensed(rule, prev, root):
            return False
        if rule.harmonic and not check_vowel_harmony(stem, allomorph):
            return False
        return check_junction(stem, allomorph, rule)

    def suffix_chains(self, root: Root, stem: str, rest: str, prev: str | None = None) -> Iterator[tuple[tuple[str, str], ...]]:
        """All licensed suffix sequences covering ``rest`` after ``stem``."""
        if not rest:
            yield ()
            return
        for rule, allo in self._by_first.get(rest[0], ()):
            if not rest.startswith(allo) or not self.admits(stem, allo, rule, prev, root):
                continue
            for tail in self.suffix_chains(root, stem + allo, rest[len(allo):], rule.id):
                yield ((rule.id, allo),) + tail

    def parse(self, token: str) -> Parse | None:
        if token in self._cache:
            return self._cache[token]
        result = self._parse(token)
        self._cache[token] = result
        return result

    def _parse(self, token: str) -> Parse | None:
        if not token or not token.isalpha():
            return None
        for surface in self.root_prefixes(token):
            rest = token[len(surface):]
            best = None
            for root, is_alt in self.entries(surface):
                for chain in self.suffix_chains(root, surface, rest):
                    if not alternation_ok(root, is_alt, chain):
                        continue
                    key = (len(chain), tuple(r for r, _ in chain))
                    if best is None or key < best[0]:
                        best = (key, root, chain)
            if best is not None:
                _, root, chain = best
                pure = not chain and root.atomic
                return Parse(surface, chain, True, pure, root.form)
        return None


def alternation_ok(root: Root, is_alt: bool, chain) -> bool:
    """Alternate stems appear only before a vowel, and are mandatory there."""
    vowel_next = bool(chain) and chain[0][1][0] in VOWELS
    if is_alt:
        return vowel_next
    return not (root.alt and vowel_next)


def resource_from_dict(data: dict) -> MorphologyResource:
    roots = []
    for entry in data.get("roots", []):
        pos = entry.get("pos", "noun")
        roots.append(Root(
            form=entry["form"],
            atomic=bool(entry.get("atomic", True)),
            pos=tuple([pos] if isinstance(pos, str) else pos),
            alt=tuple(entry.get("alt", [])),
        ))
    suffixes = [
        SuffixRule(
            id=s["id"],
            allomorphs=tuple(s.get("allomorphs", [])),
            follows=frozenset(s.get("follows", [])),
            harmonic=bool(s.get("harmonic", True)),
        )
        for s in data.get("suffixes", [])
    ]
    return MorphologyResource(roots, suffixes, version=str(data.get("version", "unversioned")))


def resource_to_dict(resource: MorphologyResource) -> dict:
    return {
        "version": resource.version,
        "roots": [
            {"form": r.form, "atomic": r.atomic, "pos": list(r.pos), "alt": list(r.alt)}
            for r in resource.roots.values()
        ],
        "suffixes": [
            {"id": s.id, "allomorphs": list(s.allomorphs), "follows": sorted(s.follows), "harmonic": s.harmonic}
            for s in resource.suffixes
        ],
    }


def load_resource(path: str | Path) -> MorphologyResource:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return resource_from_dict(data)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ResourceError(f"{path}: malformed resource ({exc})") from None


def save_resource(resource: MorphologyResource, path: str | Path) -> None:
    Path(path).write_text(json.dumps(resource_to_dict(resource), ensure_ascii=False, indent=1), encoding="utf-8")


def default_resource_path() -> Path:
    return Path(__file__).parent / "data" / "turkish_mini.json"


_default: MorphologyResource | None = None


def default_resource() -> MorphologyResource:
    global _default
    if _default is None:
        _default = load_resource(default_resource_path())
    return _default


def parse(token: str, resource: MorphologyResource) -> Parse | None:
    return resource.parse(token)


def is_valid_word(token: str, resource: MorphologyResource) -> bool:
    return resource.parse(token) is not None


def is_pure(token: str, resource: MorphologyResource, count_bound_morphemes_as_pure: bool = False) -> bool:
    """Valid, single atomic root, no suffixes.

    With ``count_bound_morphemes_as_pure`` a bare suffix allomorph ("den",
    "imiz") also counts as pure even though it is not a valid word.
    """
    p = resource.parse(token)
    if p is not None:
        return p.is_pure
    return count_bound_morphemes_as_pure and token in resource.allomorph_set
