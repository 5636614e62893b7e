"""Devanagari grapheme-to-phoneme conversion.

The pipeline has three stages:

1. ``tokenize_aksharas`` groups codepoints into akshara units: consonant
   clusters joined by the halant, an optional vowel sign, and an optional
   nasalization/visarga modifier.
2. The rule pass maps each akshara to phonemes: consonants get their base
   phoneme (nukta forms map to the loan phonemes), a bare consonant receives
   the inherent schwa, matras map to their vowels.
3. ``apply_schwa_deletion`` prunes inherent schwas: the word-final schwa is
   dropped whenever the word keeps at least one other vowel, and a medial
   schwa in the context V C ə C V is dropped when the syllable after it is
   vowel-bearing and no triple consonant cluster results. The medial scan
   runs right to left, which keeps forms like समझना /s ə m ə dʒʱ n̪ aː/
   correct.

Nasalization: the chandrabindu always nasalizes the akshara's vowel. The
anusvara becomes the homorganic nasal of the next consonant (velar before
velars, labial before labials, ...) and nasalizes the preceding vowel
word-finally or before glottals.

Input is NFC-normalized before tokenization, so precomposed nukta letters
(क़ ...) arrive as base consonant + nukta sign. Source spans and error byte
offsets refer to the normalized UTF-8 text.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, NamedTuple

from .errors import EmptyInput, UnknownGrapheme, UnsupportedCharacter
from .inventory import PhonemeInventory, PhonemeSequence, load_inventory

SIGN_CANDRABINDU = "ँ"
SIGN_ANUSVARA = "ं"
SIGN_VISARGA = "ः"
SIGN_NUKTA = "़"
SIGN_VIRAMA = "्"
ZERO_WIDTH = {"‌", "‍"}

INDEPENDENT_VOWELS = {
    "अ": "ə",
    "आ": "aː",
    "इ": "ɪ",
    "ई": "iː",
    "उ": "ʊ",
    "ऊ": "uː",
    "ऋ": "r̩",
    "ऍ": "ɛː",
    "ए": "eː",
    "ऐ": "ɛː",
    "ऑ": "ɔː",
    "ओ": "oː",
    "औ": "ɔː",
}

MATRAS = {
    "ा": "aː",  # ा
    "ि": "ɪ",  # ि
    "ी": "iː",  # ी
    "ु": "ʊ",  # ु
    "ू": "uː",  # ू
    "ृ": "r̩",  # ृ
    "ॅ": "ɛː",  # ॅ
    "े": "eː",  # े
    "ै": "ɛː",  # ै
    "ॉ": "ɔː",  # ॉ
    "ो": "oː",  # ो
    "ौ": "ɔː",  # ौ
}

CONSONANTS = {
    "क": "k",
    "ख": "kʰ",
    "ग": "ɡ",
    "घ": "ɡʱ",
    "ङ": "ŋ",
    "च": "tʃ",
    "छ": "tʃʰ",
    "ज": "dʒ",
    "झ": "dʒʱ",
    "ञ": "ɲ",
    "ट": "ʈ",
    "ठ": "ʈʰ",
    "ड": "ɖ",
    "ढ": "ɖʱ",
    "ण": "ɳ",
    "त": "t̪",
    "थ": "t̪ʰ",
    "द": "d̪",
    "ध": "d̪ʱ",
    "न": "n̪",
    "प": "p",
    "फ": "pʰ",
    "ब": "b",
    "भ": "bʱ",
    "म": "m",
    "य": "j",
    "र": "r",
    "ल": "l",
    "व": "ʋ",
    "श": "ʃ",
    "ष": "ʂ",
    "स": "s",
    "ह": "ɦ",
}

# Loan phonemes written with the nukta dot under a base consonant.
NUKTA_CONSONANTS = {
    "क": "q",
    "ख": "x",
    "ग": "ɣ",
    "ज": "z",
    "फ": "f",
    "ड": "ɽ",
    "ढ": "ɽʱ",
}

DEVANAGARI_DIGITS = set("०१२३४५६७८९")
ASCII_DIGITS = set("0123456789")
PUNCTUATION = set("।॥.,!?;:()\"'-–—")

MODIFIER_NAMES = {
    SIGN_ANUSVARA: "anusvara",
    SIGN_CANDRABINDU: "chandrabindu",
    SIGN_VISARGA: "visarga",
}

INHERENT = "inherent"

# Trace rule labels, one per emitted phoneme.
RULE_INHERENT_SCHWA = "inherent_schwa"
RULE_MATRA = "matra"
RULE_SCHWA_DELETED = "schwa_deleted"
RULE_NASAL_ASSIMILATION = "nasal_assimilation"
RULE_CONJUNCT = "conjunct"
RULE_NUKTA = "nukta"
RULE_DIRECT = "direct"


@dataclass(frozen=True)
class AksharaToken:
    kind: str  # consonant_cluster | independent_vowel | digit | punctuation | space
    consonants: tuple[tuple[str, bool], ...]  # (grapheme, has_nukta)
    vowel: str | None  # matra char, independent vowel char, "inherent", or None
    modifier: str  # none | anusvara | chandrabindu | visarga
    source_span: tuple[int, int]  # byte offsets into the normalized UTF-8 text


class TraceStep(NamedTuple):
    akshara_index: int
    rule: str


@dataclass(frozen=True)
class G2PResult:
    sequence: PhonemeSequence
    trace: tuple[TraceStep, ...]


@dataclass
class PhonemeSlot:
    """One cell of the per-word grapheme-phoneme lattice."""

    phoneme_id: int
    inherent: bool
    akshara_index: int
    rule: str


@lru_cache(maxsize=1)
def default_inventory() -> PhonemeInventory:
    return load_inventory()


def _byte_offsets(text: str) -> list[int]:
    offs = [0]
    for ch in text:
        offs.append(offs[-1] + len(ch.encode("utf-8")))
    return offs


def tokenize_aksharas(text: str) -> list[AksharaToken]:
    """Split Devanagari text into akshara tokens.

    Concatenating the source spans reproduces the (NFC-normalized) input.
    Characters outside the supported set raise UnsupportedCharacter with
    their byte offset.
    """
    text = unicodedata.normalize("NFC", text)
    chars = list(text)
    offs = _byte_offsets(text)
    tokens: list[AksharaToken] = []
    i = 0
    n = len(chars)
    while i < n:
        c = chars[i]
        start = i
        if c.isspace():
            while i < n and chars[i].isspace():
                i += 1
            tokens.append(AksharaToken("space", (), None, "none", (offs[start], offs[i])))
        elif c in DEVANAGARI_DIGITS or c in ASCII_DIGITS:
            while i < n and (chars[i] in DEVANAGARI_DIGITS or chars[i] in ASCII_DIGITS):
                i += 1
            tokens.append(AksharaToken("digit", (), None, "none", (offs[start], offs[i])))
        elif c in PUNCTUATION:
            i += 1
            tokens.append(AksharaToken("punctuation", (), None, "none", (offs[start], offs[i])))
        elif c in INDEPENDENT_VOWELS:
            i += 1
            modifier = "none"
            while i < n and (chars[i] in MODIFIER_NAMES or chars[i] in ZERO_WIDTH):
                ch = chars[i]
                if ch in MODIFIER_NAMES:
                    if modifier != "none":
                        raise UnsupportedCharacter(ch, offs[i])
                    modifier = MODIFIER_NAMES[ch]
                i += 1
            tokens.append(
                AksharaToken("independent_vowel", (), c, modifier, (offs[start], offs[i]))
            )
        elif c in CONSONANTS:
            consonants: list[tuple[str, bool]] = [(c, False)]
            i += 1
            vowel: str | None = INHERENT
            modifier = "none"
            while i < n:
                ch = chars[i]
                if ch in ZERO_WIDTH:
                    i += 1
                elif ch == SIGN_NUKTA:
                    grapheme, has_nukta = consonants[-1]
                    if has_nukta or vowel != INHERENT or modifier != "none":
                        raise UnsupportedCharacter(ch, offs[i])
                    consonants[-1] = (grapheme, True)
                    i += 1
                elif ch == SIGN_VIRAMA:
                    if vowel != INHERENT or modifier != "none":
                        raise UnsupportedCharacter(ch, offs[i])
                    i += 1
                    while i < n and chars[i] in ZERO_WIDTH:
                        i += 1
                    if i < n and chars[i] in CONSONANTS:
                        consonants.append((chars[i], False))
                        i += 1
                    else:
                        vowel = None  # final halant: schwa suppressed
                        break
                elif ch in MATRAS:
                    if vowel != INHERENT or modifier != "none":
                        raise UnsupportedCharacter(ch, offs[i])
                    vowel = ch
                    i += 1
                elif ch in MODIFIER_NAMES:
                    if modifier != "none":
                        raise UnsupportedCharacter(ch, offs[i])
                    modifier = MODIFIER_NAMES[ch]
                    i += 1
                else:
                    break
            tokens.append(
                AksharaToken(
                    "consonant_cluster",
                    tuple(consonants),
                    vowel,
                    modifier,
                    (offs[start], offs[i]),
                )
            )
        else:
            raise UnsupportedCharacter(c, offs[i])
    return tokens


def _consonant_phoneme(grapheme: str, nukta: bool, inventory: PhonemeInventory):
    if nukta:
        ipa = NUKTA_CONSONANTS.get(grapheme)
        if ipa is None:
            raise UnknownGrapheme(grapheme + SIGN_NUKTA)
    else:
        ipa = CONSONANTS.get(grapheme)
        if ipa is None:
            raise UnknownGrapheme(grapheme)
    if not inventory.has_ipa(ipa):
        raise UnknownGrapheme(grapheme)
    return inventory.by_ipa(ipa)


def _vowel_phoneme(ipa: str, inventory: PhonemeInventory):
    if not inventory.has_ipa(ipa):
        raise UnknownGrapheme(ipa)
    return inventory.by_ipa(ipa)


def _nasalize_last_vowel(slots: list[PhonemeSlot], inventory: PhonemeInventory, offset: int):
    for slot in reversed(slots):
        if inventory.is_vowel_like(slot.phoneme_id):
            counterpart = inventory.nasal_counterpart(inventory.get(slot.phoneme_id))
            if counterpart is not None and counterpart.id != slot.phoneme_id:
                slot.phoneme_id = counterpart.id
                slot.rule = RULE_NASAL_ASSIMILATION
            # vowels without a nasal counterpart (ऋ, diphthongs) are left oral
            return
    raise UnsupportedCharacter(SIGN_CANDRABINDU, offset)


def _first_consonant_of(akshara: AksharaToken, inventory: PhonemeInventory):
    if akshara.kind != "consonant_cluster":
        return None
    grapheme, nukta = akshara.consonants[0]
    return _consonant_phoneme(grapheme, nukta, inventory)


def _word_slots(
    aksharas: list[tuple[int, AksharaToken]], inventory: PhonemeInventory
) -> list[PhonemeSlot]:
    slots: list[PhonemeSlot] = []
    for pos, (idx, ak) in enumerate(aksharas):
        if ak.kind == "independent_vowel":
            ph = _vowel_phoneme(INDEPENDENT_VOWELS[ak.vowel], inventory)
            slots.append(PhonemeSlot(ph.id, False, idx, RULE_DIRECT))
        else:
            cluster = len(ak.consonants) > 1
            for grapheme, nukta in ak.consonants:
                ph = _consonant_phoneme(grapheme, nukta, inventory)
                rule = RULE_NUKTA if nukta else (RULE_CONJUNCT if cluster else RULE_DIRECT)
                slots.append(PhonemeSlot(ph.id, False, idx, rule))
            if ak.vowel == INHERENT:
                schwa = inventory.by_ipa("ə")
                slots.append(PhonemeSlot(schwa.id, True, idx, RULE_INHERENT_SCHWA))
            elif ak.vowel is not None:
                ph = _vowel_phoneme(MATRAS[ak.vowel], inventory)
                slots.append(PhonemeSlot(ph.id, False, idx, RULE_MATRA))

        if ak.modifier == "visarga":
            slots.append(PhonemeSlot(inventory.by_ipa("h").id, False, idx, RULE_DIRECT))
        elif ak.modifier == "chandrabindu":
            _nasalize_last_vowel(slots, inventory, ak.source_span[0])
        elif ak.modifier == "anusvara":
            nxt = aksharas[pos + 1][1] if pos + 1 < len(aksharas) else None
            nasal = None
            if nxt is not None:
                follower = _first_consonant_of(nxt, inventory)
                if follower is not None:
                    nasal = inventory.homorganic_nasal(follower.features.place)
            if nasal is not None:
                slots.append(PhonemeSlot(nasal.id, False, idx, RULE_NASAL_ASSIMILATION))
            else:
                _nasalize_last_vowel(slots, inventory, ak.source_span[0])
    return slots


def apply_schwa_deletion(
    slots: Iterable[PhonemeSlot], inventory: PhonemeInventory | None = None
) -> list[PhonemeSlot]:
    """Prune inherent schwas from one word's lattice.

    Word-final inherent schwa is deleted when the word has two or more vowel
    slots (monosyllables keep theirs). A medial inherent schwa in the exact
    context V C ə C V is deleted right-to-left when deletion leaves no run of
    three or more consonants. The consonant preceding a deleted schwa is
    re-tagged ``schwa_deleted``.
    """
    inventory = inventory or default_inventory()
    out = [replace(s) if isinstance(s, PhonemeSlot) else s for s in slots]

    def is_vowel(i: int) -> bool:
        return inventory.is_vowel_like(out[i].phoneme_id)

    vowel_count = sum(1 for i in range(len(out)) if is_vowel(i))
    if vowel_count >= 2 and out and out[-1].inherent:
        out.pop()
        if out and not is_vowel(len(out) - 1):
            out[-1].rule = RULE_SCHWA_DELETED

    i = len(out) - 3
    while i >= 2:
        if (
            out[i].inherent
            and is_vowel(i - 2)
            and not is_vowel(i - 1)
            and not is_vowel(i + 1)
            and is_vowel(i + 2)
        ):
            # guard: deletion must not create a >=3 consonant run
            left = i - 1
            while left - 1 >= 0 and not is_vowel(left - 1):
                left -= 1
            right = i + 1
            while right + 1 < len(out) and not is_vowel(right + 1):
                right += 1
            if (right - left) <= 2:  # run holds only the two flanking consonants
                out.pop(i)
                out[i - 1].rule = RULE_SCHWA_DELETED
        i -= 1
    return out


def load_lexicon(path: str | Path) -> dict[str, list[str]]:
    """Read an exceptions lexicon: lines of ``word<TAB>space-separated ipa``."""
    lex: dict[str, list[str]] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        word, _, pron = line.partition("\t")
        if not pron:
            continue
        lex[unicodedata.normalize("NFC", word)] = pron.split()
    return lex


def to_phonemes(
    text: str,
    inventory: PhonemeInventory | None = None,
    schwa_deletion: bool = True,
    lexicon: dict[str, list[str]] | None = None,
) -> G2PResult:
    """Convert Devanagari text to its canonical phoneme sequence.

    Words are delimited by whitespace, digits, danda and punctuation. The
    optional exceptions lexicon is consulted per word before the rules run.
    """
    inventory = inventory or default_inventory()
    text = unicodedata.normalize("NFC", text)
    aksharas = tokenize_aksharas(text)

    words: list[list[tuple[int, AksharaToken]]] = []
    current: list[tuple[int, AksharaToken]] = []
    for idx, ak in enumerate(aksharas):
        if ak.kind in ("consonant_cluster", "independent_vowel"):
            current.append((idx, ak))
        elif current:
            words.append(current)
            current = []
    if current:
        words.append(current)
    if not words:
        raise EmptyInput("text contains no pronounceable Devanagari content")

    raw = text.encode("utf-8")
    word_slot_lists: list[list[PhonemeSlot]] = []
    for group in words:
        surface = raw[group[0][1].source_span[0] : group[-1][1].source_span[1]].decode("utf-8")
        if lexicon is not None and surface in lexicon:
            first_idx = group[0][0]
            slots = [
                PhonemeSlot(inventory.by_ipa(ipa).id, False, first_idx, RULE_DIRECT)
                for ipa in lexicon[surface]
            ]
        else:
            slots = _word_slots(group, inventory)
            if schwa_deletion:
                slots = apply_schwa_deletion(slots, inventory)
        if slots:
            word_slot_lists.append(slots)

    if not word_slot_lists:
        raise EmptyInput("text contains no pronounceable Devanagari content")

    sequence = PhonemeSequence.from_words(
        [[s.phoneme_id for s in slots] for slots in word_slot_lists]
    )
    trace = tuple(
        TraceStep(s.akshara_index, s.rule) for slots in word_slot_lists for s in slots
    )
    return G2PResult(sequence=sequence, trace=trace)
