"""Mispronounced-corpus synthesis.

Builds paired correct/corrupted utterances from Devanagari sentences:
each canonical phoneme independently receives an error with probability p,
the error kind drawn uniformly from addition, deletion and substitution.
Every pair records its edit script and a binary per-phoneme error vector,
and replaying the script on the canonical sequence reproduces the corrupted
sequence exactly.

Randomness is fully deterministic: each corpus entry gets its own splitmix64
substream derived from the master seed and the entry id, so manifests are
byte-identical across runs and platforms (TTS audio content aside).

Edit scripts are stored in canonical form: an edit inside a run of identical
phonemes is anchored at the leftmost equivalent position. The alignment
backtrace resolves the same ambiguity the same way, so recovered scripts can
be compared against injected ones directly.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np

from .audio import (
    AudioBuffer,
    AugmentSpec,
    CANONICAL_RATE,
    GAIN_DB_RANGE,
    SPEED_RANGE,
    apply_gain_db,
    change_speed,
    enforce_duration,
    read_wav,
    resample,
    write_wav,
)
from .errors import CaptError, InvalidProbability
from .g2p import to_phonemes
from .inventory import (
    CONFUSABLE_DISTANCE,
    DEFAULT_WEIGHTS,
    FeatureWeightTable,
    PhonemeInventory,
    PhonemeSequence,
)
from .rng import SplitMix64, derive_seed

log = logging.getLogger(__name__)

ADDITION = "addition"
DELETION = "deletion"
SUBSTITUTION = "substitution"
ERROR_KINDS = (ADDITION, DELETION, SUBSTITUTION)

POLICY_CONFUSABLE = "confusable"
POLICY_UNIFORM = "uniform"


@dataclass(frozen=True)
class ErrorOp:
    """One injected phoneme error.

    ``canonical_index`` is the touched canonical phoneme position; for an
    addition it is the position after which the new phoneme is inserted
    (-1 inserts before the first phoneme).
    """

    kind: str
    canonical_index: int
    inserted_or_replacement: int | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "canonical_index": self.canonical_index,
            "inserted_or_replacement": self.inserted_or_replacement,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ErrorOp":
        return cls(d["kind"], d["canonical_index"], d["inserted_or_replacement"])


@dataclass(frozen=True)
class ErrorVector:
    bits: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"bits": list(self.bits)}

    @classmethod
    def from_dict(cls, d: dict) -> "ErrorVector":
        return cls(tuple(int(b) for b in d["bits"]))


@dataclass
class UtterancePair:
    sentence_id: str
    text: str
    canonical: PhonemeSequence
    corrupted: PhonemeSequence
    ops: list[ErrorOp]
    error_vector: ErrorVector
    speaker_id: int
    seed: int
    audio_paths: dict[str, str] | None = None
    augment: dict | None = None

    def to_dict(self) -> dict:
        d = {
            "sentence_id": self.sentence_id,
            "text": self.text,
            "canonical": self.canonical.to_dict(),
            "corrupted": self.corrupted.to_dict(),
            "ops": [op.to_dict() for op in self.ops],
            "error_vector": self.error_vector.to_dict(),
            "speaker_id": self.speaker_id,
            "seed": self.seed,
            "audio_paths": self.audio_paths,
        }
        if self.augment is not None:
            d["augment"] = self.augment
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "UtterancePair":
        return cls(
            sentence_id=d["sentence_id"],
            text=d["text"],
            canonical=PhonemeSequence.from_dict(d["canonical"]),
            corrupted=PhonemeSequence.from_dict(d["corrupted"]),
            ops=[ErrorOp.from_dict(o) for o in d["ops"]],
            error_vector=ErrorVector.from_dict(d["error_vector"]),
            speaker_id=d["speaker_id"],
            seed=d["seed"],
            audio_paths=d.get("audio_paths"),
            augment=d.get("augment"),
        )


@dataclass
class CorpusManifest:
    entries: list[UtterancePair]
    metadata: dict

    def __post_init__(self):
        if self.metadata.get("n_pairs") != len(self.entries):
            raise CaptError(
                f"manifest metadata n_pairs={self.metadata.get('n_pairs')} "
                f"does not match {len(self.entries)} entries"
            )


class TtsClient(Protocol):
    """Synthesizes audio for a sentence or an explicit phoneme rendition."""

    def synthesize(
        self,
        speaker_id: int,
        text: str | None = None,
        phonemes: Sequence[str] | None = None,
    ) -> AudioBuffer: ...


# ---------------------------------------------------------------------------
# error injection


def _confusables_cache(inventory: PhonemeInventory, weights: FeatureWeightTable) -> dict[int, list[int]]:
    cache = getattr(inventory, "_confusable_cache", None)
    if cache is None:
        cache = {}
        setattr(inventory, "_confusable_cache", cache)
    table = cache.get(weights)
    if table is None:
        table = {
            p.id: sorted(q.id for q in inventory.confusables(p, weights, CONFUSABLE_DISTANCE))
            for p in inventory
        }
        cache[weights] = table
    return table


def _canonical_anchor(ids: Sequence[int], anchor: int, value: int, occupied: set[int]) -> int:
    """Leftmost equivalent insertion anchor: slide left across phonemes equal
    to the inserted value, stopping at positions already carrying an op."""
    a = anchor
    while a >= 0 and ids[a] == value and (a - 1) not in occupied:
        a -= 1
    return a


def _canonical_deletion_index(ids: Sequence[int], index: int, occupied: set[int]) -> int:
    """Leftmost position of the run of identical phonemes containing index."""
    i = index
    while i - 1 >= 0 and ids[i - 1] == ids[index] and i - 1 not in occupied:
        i -= 1
    return i


def inject_errors(
    canonical: PhonemeSequence,
    p: float,
    rng_seed: int,
    inventory: PhonemeInventory,
    confusion_policy: str = POLICY_CONFUSABLE,
    weights: FeatureWeightTable = DEFAULT_WEIGHTS,
) -> tuple[PhonemeSequence, list[ErrorOp], ErrorVector]:
    """Corrupt a canonical sequence with per-phoneme probability ``p``.

    At most one error per canonical position; marker tokens are never
    touched. Deterministic for a given seed.
    """
    if not 0.0 <= p <= 0.5:
        raise InvalidProbability(f"error probability must lie in [0, 0.5], got {p}")
    if confusion_policy not in (POLICY_CONFUSABLE, POLICY_UNIFORM):
        raise ValueError(f"unknown confusion policy {confusion_policy!r}")

    rng = SplitMix64(rng_seed)
    words = canonical.words()
    ids = canonical.phoneme_ids()
    n = len(ids)
    confusables = _confusables_cache(inventory, weights)
    all_ids = [ph.id for ph in inventory.phonemes]

    word_of = {}
    pos = 0
    for w, word in enumerate(words):
        for _ in word:
            word_of[pos] = w
            pos += 1

    raw_ops: list[tuple[str, int, int | None]] = []
    for i in range(n):
        if rng.random() >= p:
            continue
        kind = ERROR_KINDS[rng.randrange(3)]
        if kind == DELETION:
            raw_ops.append((DELETION, i, None))
        elif kind == SUBSTITUTION:
            if confusion_policy == POLICY_CONFUSABLE:
                candidates = confusables[ids[i]] or [t for t in all_ids if t != ids[i]]
            else:
                candidates = [t for t in all_ids if t != ids[i]]
            raw_ops.append((SUBSTITUTION, i, candidates[rng.randrange(len(candidates))]))
        else:  # addition: sample from the confusable sets of the word's phonemes
            word_ids = sorted(set(words[word_of[i]]))
            pool = sorted({c for w_id in word_ids for c in confusables[w_id]})
            if not pool:
                pool = all_ids
            raw_ops.append((ADDITION, i, pool[rng.randrange(len(pool))]))

    # canonicalize op positions: edits in runs of identical phonemes anchor
    # at the leftmost equivalent slot (matches the aligner's tie-breaking)
    occupied = {i for _, i, _ in raw_ops}
    ops: list[ErrorOp] = []
    for kind, i, payload in raw_ops:
        occupied.discard(i)
        if kind == DELETION:
            i = _canonical_deletion_index(ids, i, occupied)
        elif kind == ADDITION:
            i = _canonical_anchor(ids, i, payload, occupied)
        occupied.add(i)
        ops.append(ErrorOp(kind, i, payload))
    ops.sort(key=lambda op: (op.canonical_index, op.kind))

    corrupted_words = _replay(words, ops)
    ev_bits = [0] * n
    for op in ops:
        ev_bits[max(op.canonical_index, 0)] = 1
    corrupted = PhonemeSequence.from_words([w for w in corrupted_words if w])
    return corrupted, ops, ErrorVector(tuple(ev_bits))


def _replay(words: list[list[int]], ops: Iterable[ErrorOp]) -> list[list[int]]:
    """Apply an edit script to word-structured canonical ids."""
    by_index: dict[int, ErrorOp] = {}
    prefix: ErrorOp | None = None
    for op in ops:
        if op.kind == ADDITION and op.canonical_index < 0:
            prefix = op
        else:
            if op.canonical_index in by_index:
                raise CaptError(f"two ops share canonical position {op.canonical_index}")
            by_index[op.canonical_index] = op

    out: list[list[int]] = []
    pos = 0
    for w, word in enumerate(words):
        new_word: list[int] = []
        if w == 0 and prefix is not None:
            new_word.append(prefix.inserted_or_replacement)
        for token in word:
            op = by_index.get(pos)
            if op is None:
                new_word.append(token)
            elif op.kind == DELETION:
                pass
            elif op.kind == SUBSTITUTION:
                new_word.append(op.inserted_or_replacement)
            else:  # addition inserts after this position, inside this word
                new_word.append(token)
                new_word.append(op.inserted_or_replacement)
            pos += 1
        out.append(new_word)
    return out


def replay_ops(canonical: PhonemeSequence, ops: Iterable[ErrorOp]) -> PhonemeSequence:
    """Re-apply a stored edit script; used to verify manifest integrity."""
    words = _replay(canonical.words(), ops)
    return PhonemeSequence.from_words([w for w in words if w])


def nonadjacent(ops: Iterable[ErrorOp], min_gap: int = 3) -> bool:
    """True when every pair of ops is at least ``min_gap`` positions apart."""
    idx = sorted(op.canonical_index for op in ops)
    return all(b - a >= min_gap for a, b in zip(idx, idx[1:]))


# ---------------------------------------------------------------------------
# corpus construction


def build_corpus(
    sentences: Sequence[str],
    n_pairs: int,
    p: float,
    seed: int,
    inventory: PhonemeInventory,
    speakers: Sequence[int] = tuple(range(10)),
    tts: TtsClient | None = None,
    out_dir: str | Path | None = None,
    confusion_policy: str = POLICY_CONFUSABLE,
    jobs: int = 1,
) -> CorpusManifest:
    """Build a paired corpus of ``n_pairs`` utterances.

    Sentences cycle across speaker ids so each (sentence, speaker) pair is
    unique; sentences that fail G2P are skipped with a warning. With a TTS
    client both renditions are synthesized with the same speaker, resampled
    to 8 kHz and truncated to 8 s; synthesis failures are retried once, then
    the entry keeps ``audio_paths=None``.
    """
    if not 0.0 <= p <= 0.5:
        raise InvalidProbability(f"error probability must lie in [0, 0.5], got {p}")
    usable: list[tuple[str, PhonemeSequence]] = []
    for s in sentences:
        try:
            usable.append((s, to_phonemes(s, inventory).sequence))
        except CaptError as exc:
            log.warning("skipping sentence %r: %s", s, exc)
    if not usable:
        raise CaptError("no usable sentences after G2P")
    if n_pairs > len(usable) * len(speakers):
        raise CaptError(
            f"cannot build {n_pairs} pairs from {len(usable)} sentences x {len(speakers)} speakers"
        )
    if tts is not None and out_dir is None:
        raise CaptError("out_dir is required when synthesizing audio")

    audio_dir = None
    if tts is not None:
        audio_dir = Path(out_dir) / "audio"
        audio_dir.mkdir(parents=True, exist_ok=True)

    def make_entry(k: int) -> UtterancePair:
        text, canonical = usable[k % len(usable)]
        speaker = speakers[(k // len(usable)) % len(speakers)]
        sentence_id = f"s{k:05d}"
        sub_seed = derive_seed(seed, sentence_id)
        corrupted, ops, ev = inject_errors(
            canonical, p, sub_seed, inventory, confusion_policy
        )
        pair = UtterancePair(
            sentence_id=sentence_id,
            text=text,
            canonical=canonical,
            corrupted=corrupted,
            ops=ops,
            error_vector=ev,
            speaker_id=speaker,
            seed=sub_seed,
        )
        if tts is not None:
            pair.audio_paths = _synthesize_pair(pair, tts, inventory, audio_dir)
        return pair

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(make_entry, range(n_pairs)))
    else:
        entries = [make_entry(k) for k in range(n_pairs)]

    metadata = {
        "p_error": p,
        "n_pairs": n_pairs,
        "seed": seed,
        "speaker_count": len(speakers),
        "sample_rate": CANONICAL_RATE,
    }
    return CorpusManifest(entries=entries, metadata=metadata)


def _ipa_words(seq: PhonemeSequence, inventory: PhonemeInventory) -> list[str]:
    return [inventory.get(t).ipa for t in seq.phoneme_ids()]


def _synthesize_pair(
    pair: UtterancePair,
    tts: TtsClient,
    inventory: PhonemeInventory,
    audio_dir: Path,
) -> dict[str, str] | None:
    def render(phonemes: Sequence[str], text: str | None, suffix: str) -> str:
        buf = tts.synthesize(speaker_id=pair.speaker_id, text=text, phonemes=phonemes)
        buf = enforce_duration(resample(buf, CANONICAL_RATE))
        rel = f"audio/{pair.sentence_id}_{suffix}.wav"
        write_wav(audio_dir / f"{pair.sentence_id}_{suffix}.wav", buf)
        return rel

    for attempt in (1, 2):
        try:
            correct = render(_ipa_words(pair.canonical, inventory), pair.text, "correct")
            wrong = render(_ipa_words(pair.corrupted, inventory), None, "mispronounced")
            return {"correct": correct, "mispronounced": wrong}
        except CaptError as exc:
            log.warning("TTS failed for %s (attempt %d): %s", pair.sentence_id, attempt, exc)
    return None


# ---------------------------------------------------------------------------
# manifest I/O (JSON lines; first line is the metadata record)


def write_manifest(manifest: CorpusManifest, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest.metadata, ensure_ascii=False, sort_keys=True) + "\n")
        for entry in manifest.entries:
            fh.write(json.dumps(entry.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")


def read_manifest(path: str | Path) -> CorpusManifest:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise CaptError(f"{path}: empty manifest")
    metadata = json.loads(lines[0])
    entries = [UtterancePair.from_dict(json.loads(line)) for line in lines[1:] if line.strip()]
    return CorpusManifest(entries=entries, metadata=metadata)


# ---------------------------------------------------------------------------
# augmentation


def augment_corpus(
    manifest: CorpusManifest,
    specs: Sequence[AugmentSpec],
    seed: int,
    manifest_dir: str | Path,
    out_dir: str | Path | None = None,
) -> tuple[CorpusManifest, list[str]]:
    """Add augmented audio variants (gain / speed) for every entry.

    Each spec produces one variant per entry; unset spec fields are drawn
    uniformly from the +/-5 dB and 0.9-1.1x ranges. Error vectors and edit
    scripts carry over unchanged. Entries without audio are skipped and
    reported. Returns the grown manifest and the skipped sentence ids.
    """
    if not specs:
        return manifest, []
    manifest_dir = Path(manifest_dir)
    out_dir = Path(out_dir) if out_dir is not None else manifest_dir
    (out_dir / "audio").mkdir(parents=True, exist_ok=True)

    new_entries: list[UtterancePair] = list(manifest.entries)
    skipped: list[str] = []
    for entry in manifest.entries:
        if not entry.audio_paths:
            skipped.append(entry.sentence_id)
            continue
        for v, spec in enumerate(specs):
            rng = SplitMix64(derive_seed(seed, entry.sentence_id, v))
            gain = spec.gain_db if spec.gain_db is not None else rng.uniform(*GAIN_DB_RANGE)
            speed = spec.speed_factor if spec.speed_factor is not None else rng.uniform(*SPEED_RANGE)
            paths = {}
            for role, rel in entry.audio_paths.items():
                buf = read_wav(manifest_dir / rel)
                buf, _ = apply_gain_db(buf, gain)
                buf = change_speed(buf, speed)
                new_rel = f"audio/{entry.sentence_id}_aug{v}_{role}.wav"
                write_wav(out_dir / new_rel, buf)
                paths[role] = new_rel
            new_entries.append(
                UtterancePair(
                    sentence_id=f"{entry.sentence_id}:aug{v}",
                    text=entry.text,
                    canonical=entry.canonical,
                    corrupted=entry.corrupted,
                    ops=list(entry.ops),
                    error_vector=entry.error_vector,
                    speaker_id=entry.speaker_id,
                    seed=entry.seed,
                    audio_paths=paths,
                    augment={"source": entry.sentence_id, "gain_db": gain, "speed_factor": speed},
                )
            )

    metadata = dict(manifest.metadata)
    metadata["n_pairs"] = len(new_entries)
    return CorpusManifest(entries=new_entries, metadata=metadata), skipped


# ---------------------------------------------------------------------------
# TTS clients


class SineTtsStub:
    """Offline stand-in for a real TTS voice.

    Each phoneme becomes a short two-tone sine composite whose frequencies
    derive from the token id, with a speaker-dependent base pitch; word marks
    become short silences. Deterministic for identical inputs.
    """

    def __init__(self, inventory: PhonemeInventory, sample_rate: int = CANONICAL_RATE,
                 phoneme_seconds: float = 0.09, g2p: Callable | None = None):
        self.inventory = inventory
        self.sample_rate = sample_rate
        self.phoneme_seconds = phoneme_seconds
        self._g2p = g2p or (lambda text: to_phonemes(text, inventory))

    def synthesize(self, speaker_id, text=None, phonemes=None) -> AudioBuffer:
        if phonemes is None:
            if text is None:
                raise CaptError("need text or phonemes")
            seq = self._g2p(text).sequence
            phonemes = [self.inventory.get(t).ipa for t in seq.phoneme_ids()]
        n = int(self.phoneme_seconds * self.sample_rate)
        t = np.arange(n) / self.sample_rate
        ramp = np.minimum(1.0, np.minimum(np.arange(n), np.arange(n)[::-1]) / (0.005 * self.sample_rate))
        base = 110.0 + 13.0 * (speaker_id % 10)
        pieces = []
        for ipa in phonemes:
            pid = self.inventory.by_ipa(ipa).id
            f1 = base + 35.0 * (pid % 16)
            f2 = 850.0 + 47.0 * (pid % 23)
            wave_ = 0.45 * np.sin(2 * np.pi * f1 * t) + 0.25 * np.sin(2 * np.pi * f2 * t)
            pieces.append(wave_ * ramp)
        signal = np.concatenate(pieces) if pieces else np.zeros(0)
        samples = np.rint(signal * 12000).astype(np.int16)
        return AudioBuffer(samples, self.sample_rate)


class HttpTtsClient:
    """POSTs {text | phonemes, speaker_id} as JSON and expects WAV bytes back."""

    def __init__(self, url: str, timeout: float = 30.0):
        self.url = url
        self.timeout = timeout

    def synthesize(self, speaker_id, text=None, phonemes=None) -> AudioBuffer:
        import httpx

        payload: dict = {"speaker_id": speaker_id}
        if text is not None:
            payload["text"] = text
        if phonemes is not None:
            payload["phonemes"] = list(phonemes)
        try:
            resp = httpx.post(self.url, json=payload, timeout=self.timeout)
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise CaptError(f"TTS request failed: {exc}") from exc
        import tempfile

        with tempfile.NamedTemporaryFile(suffix=".wav") as tmp:
            tmp.write(resp.content)
            tmp.flush()
            return read_wav(tmp.name)
