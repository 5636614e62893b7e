"""Practice sentence catalog.

Sentences load from a TSV (id, Devanagari text, difficulty tag) and get
their canonical phonemes from the G2P rules at load time. The default
catalog covers the thirteen phonemes learners struggle with most
(retroflexes, the flaps, the aspirate series and nasalized vowels), so the
rating flow can exercise each of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..analysis import Analyzer
from ..errors import CaptError, MalformedEntry
from ..inventory import PhonemeSequence

CHALLENGING_PHONEMES = (
    "ʈ", "ʈʰ", "ɖ", "ɖʱ", "ɳ", "ɽ", "ɽʱ", "kʰ", "tʃʰ", "d̪ʱ", "bʱ", "ãː", "ɛ̃ː",
)


@dataclass(frozen=True)
class CatalogSentence:
    sentence_id: str
    text: str
    difficulty: str
    canonical: PhonemeSequence

    def to_dict(self, analyzer: Analyzer) -> dict:
        inv = analyzer.inventory
        return {
            "sentence_id": self.sentence_id,
            "text": self.text,
            "difficulty": self.difficulty,
            "words": [[inv.get(t).ipa for t in w] for w in self.canonical.words()],
        }


def load_catalog(analyzer: Analyzer, source: str | Path | None = None) -> list[CatalogSentence]:
    if source is None:
        text = resources.files("hindicapt").joinpath("data/sentences.tsv").read_text("utf-8")
    else:
        text = Path(source).read_text(encoding="utf-8")
    sentences: list[CatalogSentence] = []
    seen = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise MalformedEntry(f"catalog line {line_no}: expected 3 fields, got {len(cols)}")
        sid, sentence, difficulty = cols
        if sid in seen:
            raise MalformedEntry(f"catalog line {line_no}: duplicate id {sid!r}")
        seen.add(sid)
        sentences.append(
            CatalogSentence(
                sentence_id=sid,
                text=sentence,
                difficulty=difficulty,
                canonical=analyzer.canonical_for(sentence),
            )
        )
    if not sentences:
        raise CaptError("sentence catalog is empty")
    return sentences
