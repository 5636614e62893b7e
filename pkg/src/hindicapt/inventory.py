"""Phoneme inventory: the 67-token space, articulatory features, and a
weighted feature distance.

Token layout is fixed: ids 0-63 are phonemes, 64 marks end-of-word, 65
end-of-sentence, 66 padding. The default inventory ships as a data file
(``data/phoneme_inventory.tsv``) so the phoneme list can be corrected
without touching code.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    DuplicateToken,
    InventorySize,
    MalformedEntry,
    UnknownPhoneme,
)

N_PHONEMES = 64
EOW = 64
EOS = 65
PAD = 66
N_TOKENS = 67

CATEGORIES = frozenset({"vowel", "diphthong", "consonant"})
PLACES = frozenset(
    {
        "labial",
        "labiodental",
        "dental",
        "alveolar",
        "retroflex",
        "palatal",
        "velar",
        "uvular",
        "glottal",
        "none",
    }
)
MANNERS = frozenset(
    {"plosive", "affricate", "fricative", "nasal", "approximant", "flap", "vowel"}
)
LENGTHS = frozenset({"short", "long", "none"})

_ASPIRATABLE_MANNERS = frozenset({"plosive", "affricate", "flap"})


@dataclass(frozen=True)
class PhonemeFeatures:
    category: str
    place: str
    manner: str
    voiced: bool
    aspirated: bool
    length: str
    nasalized: bool
    rounded: bool

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise MalformedEntry(f"bad category {self.category!r}")
        if self.place not in PLACES:
            raise MalformedEntry(f"bad place {self.place!r}")
        if self.manner not in MANNERS:
            raise MalformedEntry(f"bad manner {self.manner!r}")
        if self.length not in LENGTHS:
            raise MalformedEntry(f"bad length {self.length!r}")
        if self.category in ("vowel", "diphthong"):
            if self.place != "none" or self.manner != "vowel" or self.aspirated:
                raise MalformedEntry(
                    "vowels and diphthongs must have place=none, manner=vowel, aspirated=false"
                )
        if self.aspirated and self.manner not in _ASPIRATABLE_MANNERS:
            raise MalformedEntry(
                f"aspiration is only valid for plosives, affricates and flaps, not {self.manner}"
            )

    def differing(self, other: "PhonemeFeatures") -> list[str]:
        """Names of the feature fields on which ``self`` and ``other`` differ."""
        return [f.name for f in fields(self) if getattr(self, f.name) != getattr(other, f.name)]


@dataclass(frozen=True)
class Phoneme:
    id: int
    ipa: str
    devanagari_forms: tuple[str, ...]
    features: PhonemeFeatures

    def __post_init__(self):
        if not 0 <= self.id < N_PHONEMES:
            raise MalformedEntry(f"phoneme id {self.id} outside [0, {N_PHONEMES - 1}]")


@dataclass(frozen=True)
class FeatureWeightTable:
    """Weights for the per-feature hamming distance. Must sum to 1."""

    category: float = 0.30
    place: float = 0.25
    manner: float = 0.20
    voiced: float = 0.10
    aspirated: float = 0.10
    length: float = 0.05 / 3
    nasalized: float = 0.05 / 3
    rounded: float = 0.05 / 3

    def __post_init__(self):
        vals = [getattr(self, f.name) for f in fields(self)]
        if any(v < 0 for v in vals):
            raise ValueError("feature weights must be non-negative")
        if abs(sum(vals) - 1.0) > 1e-9:
            raise ValueError(f"feature weights must sum to 1, got {sum(vals)}")

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_WEIGHTS = FeatureWeightTable()

# A substitution this close counts as a "confusable": same broad category
# with one or two features off (dental/retroflex, aspirated/unaspirated, ...).
CONFUSABLE_DISTANCE = 0.35


def feature_distance(
    a: Phoneme, b: Phoneme, weights: FeatureWeightTable = DEFAULT_WEIGHTS
) -> float:
    """Weighted hamming distance between two phonemes' features, in [0, 1].

    Symmetric, zero only for the identical phoneme (distinct phonemes always
    differ in at least one feature or carry a minimal floor).
    """
    if a.id == b.id:
        return 0.0
    w = weights.as_dict()
    d = sum(w[name] for name in a.features.differing(b.features))
    # Distinct phonemes with identical feature rows (e.g. two long unrounded
    # front vowels) still differ audibly; keep the premetric strict.
    return max(d, min(v for v in w.values() if v > 0) / 2)


class PhonemeInventory:
    """Immutable set of 64 phonemes plus the three marker tokens."""

    special_tokens = {"EOW": EOW, "EOS": EOS, "PAD": PAD}

    def __init__(self, phonemes: Iterable[Phoneme]):
        self.phonemes: tuple[Phoneme, ...] = tuple(sorted(phonemes, key=lambda p: p.id))
        if len(self.phonemes) != N_PHONEMES:
            raise InventorySize(
                f"expected {N_PHONEMES} phonemes, got {len(self.phonemes)}"
            )
        self._by_id: dict[int, Phoneme] = {}
        self._by_ipa: dict[str, Phoneme] = {}
        self._by_grapheme: dict[str, Phoneme] = {}
        for p in self.phonemes:
            if p.id in self._by_id:
                raise DuplicateToken(f"duplicate token id {p.id}")
            if p.ipa in self._by_ipa:
                raise DuplicateToken(f"duplicate ipa {p.ipa!r}")
            self._by_id[p.id] = p
            self._by_ipa[p.ipa] = p
            for g in p.devanagari_forms:
                self._by_grapheme.setdefault(g, p)

    def __len__(self) -> int:
        return len(self.phonemes)

    def __iter__(self):
        return iter(self.phonemes)

    def get(self, token_id: int) -> Phoneme:
        try:
            return self._by_id[token_id]
        except KeyError:
            raise UnknownPhoneme(str(token_id)) from None

    def by_ipa(self, ipa: str) -> Phoneme:
        try:
            return self._by_ipa[ipa]
        except KeyError:
            raise UnknownPhoneme(ipa) from None

    def has_ipa(self, ipa: str) -> bool:
        return ipa in self._by_ipa

    def by_grapheme(self, grapheme: str) -> Phoneme | None:
        return self._by_grapheme.get(grapheme)

    def by_category(self, **feature_values) -> list[Phoneme]:
        """All phonemes whose features match every given field=value pair."""
        out = []
        for p in self.phonemes:
            if all(getattr(p.features, k) == v for k, v in feature_values.items()):
                out.append(p)
        return out

    def is_vowel_like(self, token_id: int) -> bool:
        return self.get(token_id).features.category in ("vowel", "diphthong")

    def confusables(
        self,
        phoneme: Phoneme,
        weights: FeatureWeightTable = DEFAULT_WEIGHTS,
        max_distance: float = CONFUSABLE_DISTANCE,
    ) -> list[Phoneme]:
        """Phonemes within ``max_distance`` of ``phoneme``, sorted by id."""
        return [
            q
            for q in self.phonemes
            if q.id != phoneme.id and feature_distance(phoneme, q, weights) <= max_distance
        ]

    def nasal_counterpart(self, vowel: Phoneme) -> Phoneme | None:
        """The nasalized vowel matching an oral vowel, if the inventory has one."""
        if vowel.features.nasalized:
            return vowel
        base = _strip_nasal_mark(vowel.ipa)
        for q in self.phonemes:
            if q.features.nasalized and _strip_nasal_mark(q.ipa) == base:
                return q
        return None

    def homorganic_nasal(self, place: str) -> Phoneme | None:
        """The nasal consonant produced at (or nearest to) the given place."""
        nearest = {
            "velar": "velar",
            "uvular": "velar",
            "palatal": "palatal",
            "retroflex": "retroflex",
            "dental": "dental",
            "alveolar": "dental",
            "labial": "labial",
            "labiodental": "labial",
        }.get(place)
        if nearest is None:
            return None
        hits = self.by_category(manner="nasal", place=nearest)
        return hits[0] if hits else None

    def save(self, path: str | Path) -> None:
        lines = ["# id\tipa\tdevanagari_forms\tcategory\tplace\tmanner\tvoiced\taspirated\tlength\tnasalized\trounded"]
        for p in self.phonemes:
            forms = ",".join(p.devanagari_forms) if p.devanagari_forms else "-"
            f = p.features
            lines.append(
                "\t".join(
                    [
                        str(p.id),
                        p.ipa,
                        forms,
                        f.category,
                        f.place,
                        f.manner,
                        "1" if f.voiced else "0",
                        "1" if f.aspirated else "0",
                        f.length,
                        "1" if f.nasalized else "0",
                        "1" if f.rounded else "0",
                    ]
                )
            )
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _strip_nasal_mark(ipa: str) -> str:
    # U+0303 is the combining tilde used on nasalized vowel symbols.
    return unicodedata.normalize("NFD", ipa).replace("̃", "")


def _parse_bool(text: str, line_no: int) -> bool:
    if text == "1":
        return True
    if text == "0":
        return False
    raise MalformedEntry(f"line {line_no}: boolean field must be 0 or 1, got {text!r}")


def _parse_line(line: str, line_no: int) -> Phoneme:
    cols = line.split("\t")
    if len(cols) != 11:
        raise MalformedEntry(f"line {line_no}: expected 11 tab-separated fields, got {len(cols)}")
    (raw_id, ipa, raw_forms, category, place, manner, voiced, aspirated, length, nasalized, rounded) = cols
    try:
        pid = int(raw_id)
    except ValueError:
        raise MalformedEntry(f"line {line_no}: bad id {raw_id!r}") from None
    if not ipa:
        raise MalformedEntry(f"line {line_no}: empty ipa")
    forms = () if raw_forms == "-" else tuple(raw_forms.split(","))
    try:
        feats = PhonemeFeatures(
            category=category,
            place=place,
            manner=manner,
            voiced=_parse_bool(voiced, line_no),
            aspirated=_parse_bool(aspirated, line_no),
            length=length,
            nasalized=_parse_bool(nasalized, line_no),
            rounded=_parse_bool(rounded, line_no),
        )
        return Phoneme(id=pid, ipa=ipa, devanagari_forms=forms, features=feats)
    except MalformedEntry as exc:
        raise MalformedEntry(f"line {line_no}: {exc}") from None


def load_inventory(source: str | Path | None = None) -> PhonemeInventory:
    """Load an inventory from a TSV file, or the packaged default.

    One phoneme per line:
    ``id<TAB>ipa<TAB>devanagari_forms<TAB>category<TAB>place<TAB>manner<TAB>voiced<TAB>aspirated<TAB>length<TAB>nasalized<TAB>rounded``.
    ``#`` starts a comment; devanagari_forms is comma-separated, ``-`` if none.
    """
    if source is None:
        text = (
            resources.files("hindicapt").joinpath("data/phoneme_inventory.tsv").read_text("utf-8")
        )
    else:
        text = Path(source).read_text(encoding="utf-8")
    phonemes = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        phonemes.append(_parse_line(line, line_no))
    return PhonemeInventory(phonemes)


@dataclass(frozen=True)
class PhonemeSequence:
    """Phoneme token ids with end-of-word marks in between words and a final
    end-of-sentence mark. ``word_spans`` indexes into the phoneme positions
    (marker tokens excluded)."""

    tokens: tuple[int, ...]

    def __post_init__(self):
        toks = self.tokens
        if not toks or toks[-1] != EOS:
            raise MalformedEntry("sequence must end with the end-of-sentence token")
        if EOS in toks[:-1]:
            raise MalformedEntry("end-of-sentence token may only appear once, last")
        if PAD in toks:
            raise MalformedEntry("padding token may not appear inside a sequence")
        body = toks[:-1]
        if not body:
            raise MalformedEntry("sequence must contain at least one phoneme")
        if body[0] == EOW or body[-1] == EOW:
            raise MalformedEntry("end-of-word token cannot start or end the sequence")
        prev = None
        for t in body:
            if t == EOW and prev == EOW:
                raise MalformedEntry("adjacent end-of-word tokens create an empty word")
            if t != EOW and not 0 <= t < N_PHONEMES:
                raise MalformedEntry(f"token id {t} outside the inventory")
            prev = t

    @classmethod
    def from_words(cls, words: Sequence[Sequence[int]]) -> "PhonemeSequence":
        toks: list[int] = []
        for i, word in enumerate(words):
            if i:
                toks.append(EOW)
            toks.extend(word)
        toks.append(EOS)
        return cls(tuple(toks))

    def phoneme_ids(self) -> tuple[int, ...]:
        """Token ids with EOW/EOS stripped."""
        return tuple(t for t in self.tokens if t < N_PHONEMES)

    @property
    def word_spans(self) -> tuple[tuple[int, int], ...]:
        """Half-open (start, end) pairs over phoneme positions, one per word."""
        spans = []
        start = 0
        pos = 0
        for t in self.tokens:
            if t == EOW or t == EOS:
                spans.append((start, pos))
                start = pos
            else:
                pos += 1
        return tuple(spans)

    def words(self) -> list[list[int]]:
        ids = self.phoneme_ids()
        return [list(ids[a:b]) for a, b in self.word_spans]

    def to_dict(self) -> dict:
        return {"tokens": list(self.tokens)}

    @classmethod
    def from_dict(cls, data: dict) -> "PhonemeSequence":
        return cls(tuple(int(t) for t in data["tokens"]))


def encode(words: Sequence[Sequence[str]], inventory: PhonemeInventory) -> PhonemeSequence:
    """Turn word-grouped IPA symbols into a token sequence.

    Raises UnknownPhoneme for any symbol outside the inventory.
    """
    id_words = []
    for word in words:
        id_words.append([inventory.by_ipa(ipa).id for ipa in word])
    return PhonemeSequence.from_words(id_words)


def decode(seq: PhonemeSequence, inventory: PhonemeInventory) -> list[list[str]]:
    """Inverse of :func:`encode`: word-grouped IPA symbols."""
    return [[inventory.get(t).ipa for t in word] for word in seq.words()]
