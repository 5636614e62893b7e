"""Exception types shared across the package."""


class CaptError(Exception):
    """Base class for all errors raised by this package."""


class DuplicateToken(CaptError):
    """Two inventory entries share a token id or an IPA symbol."""


class InventorySize(CaptError):
    """Inventory does not contain exactly the expected number of phonemes."""


class MalformedEntry(CaptError):
    """An inventory or knowledge-base line is missing fields or violates a feature invariant."""


class UnknownPhoneme(CaptError):
    """An IPA symbol is not part of the loaded inventory."""

    def __init__(self, ipa: str):
        super().__init__(f"unknown phoneme {ipa!r}")
        self.ipa = ipa


class UnsupportedCharacter(CaptError):
    """Input text contains a character the tokenizer cannot handle."""

    def __init__(self, char: str, byte_offset: int):
        super().__init__(f"unsupported character {char!r} at byte offset {byte_offset}")
        self.char = char
        self.byte_offset = byte_offset


class UnknownGrapheme(CaptError):
    """A Devanagari grapheme has no phoneme mapping in the inventory."""

    def __init__(self, grapheme: str):
        super().__init__(f"no phoneme mapping for grapheme {grapheme!r}")
        self.grapheme = grapheme


class EmptyInput(CaptError):
    """Input contains nothing pronounceable."""


class UnsupportedWav(CaptError):
    """WAV file is not 16-bit mono PCM."""


class MalformedWav(CaptError):
    """WAV file is truncated or its header is inconsistent with its size."""


class AudioTooShort(CaptError):
    """Audio clip is below the minimum usable duration."""


class InvalidProbability(CaptError):
    """Error-injection probability outside the supported range."""


class InconsistentInput(CaptError):
    """Two inputs that must describe the same data disagree (lengths, spans, ...)."""


class IncompleteKnowledgeBase(CaptError):
    """Articulatory knowledge base does not cover the full inventory."""

    def __init__(self, missing_ids):
        super().__init__(f"knowledge base missing entries for phoneme ids {sorted(missing_ids)}")
        self.missing_ids = sorted(missing_ids)
