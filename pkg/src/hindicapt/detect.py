"""Word-level mispronunciation detection.

Predicted phonemes are aligned globally against the canonical sequence; a
word counts as mispronounced when any non-match edit touches its span.
Insertions sit between two canonical positions and are attributed to the
left neighbour's word (position 0 when there is no left neighbour).

Severity of an offending position is 1 - posterior(canonical phoneme) when
recognizer posteriors are available for it (substitutions), otherwise the
edit's cost, which is already normalized to [0, 1]. A word's severity is the
maximum over its offending positions, binned minor / moderate / severe at
0.4 and 0.75 (configurable).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .align import Alignment, AlignmentOp, DELETION, MATCH, SUBSTITUTION
from .corpus import ADDITION, ErrorOp, ErrorVector, UtterancePair
from .corpus import DELETION as OP_DELETION
from .corpus import SUBSTITUTION as OP_SUBSTITUTION
from .errors import InconsistentInput, MalformedEntry
from .inventory import (
    DEFAULT_WEIGHTS,
    FeatureWeightTable,
    N_TOKENS,
    PhonemeInventory,
    PhonemeSequence,
)
from .rng import SplitMix64

DEFAULT_SEVERITY_BINS = (0.4, 0.75)

BIN_NONE = "none"
BIN_MINOR = "minor"
BIN_MODERATE = "moderate"
BIN_SEVERE = "severe"


@dataclass
class RecognizerOutput:
    """Predicted sequence plus one posterior row (over all 67 token ids) per
    predicted phoneme position."""

    phonemes: PhonemeSequence
    posteriors: np.ndarray

    def __post_init__(self):
        ids = self.phonemes.phoneme_ids()
        if self.posteriors.shape != (len(ids), N_TOKENS):
            raise MalformedEntry(
                f"posteriors shape {self.posteriors.shape} does not match "
                f"{len(ids)} phonemes x {N_TOKENS} tokens"
            )
        sums = self.posteriors.sum(axis=1)
        if len(ids) and np.max(np.abs(sums - 1.0)) > 1e-6:
            raise MalformedEntry("posterior rows must sum to 1")
        if len(ids) and not np.array_equal(np.argmax(self.posteriors, axis=1), np.array(ids)):
            raise MalformedEntry("posterior argmax must equal the emitted token")


@dataclass(frozen=True)
class WordErrorReport:
    word_index: int
    mispronounced: bool
    severity: float
    severity_bin: str
    offending_ops: tuple[AlignmentOp, ...]
    phoneme_pairs: tuple[tuple[int | None, int | None], ...]  # (expected, produced) token ids

    def to_dict(self, inventory: PhonemeInventory | None = None) -> dict:
        def ipa(token):
            if token is None or inventory is None:
                return token
            return inventory.get(token).ipa

        return {
            "word_index": self.word_index,
            "mispronounced": self.mispronounced,
            "severity": round(self.severity, 6),
            "severity_bin": self.severity_bin,
            "offending_ops": [op.to_dict() for op in self.offending_ops],
            "phoneme_pairs": [
                {"expected": ipa(e), "produced": ipa(p)} for e, p in self.phoneme_pairs
            ],
        }


def severity_bin(severity: float, bins: tuple[float, float] = DEFAULT_SEVERITY_BINS) -> str:
    lo, hi = bins
    if severity < lo:
        return BIN_MINOR
    if severity < hi:
        return BIN_MODERATE
    return BIN_SEVERE


def detect_word_errors(
    alignment: Alignment,
    word_spans: Sequence[tuple[int, int]],
    canonical_ids: Sequence[int],
    predicted_ids: Sequence[int] | None = None,
    rec: RecognizerOutput | None = None,
    bins: tuple[float, float] = DEFAULT_SEVERITY_BINS,
) -> list[WordErrorReport]:
    """Roll an alignment up to per-word mispronunciation reports.

    ``canonical_ids`` are the stripped canonical tokens (substitution
    severity reads the posterior mass of the canonical phoneme, and feedback
    needs the token identities). ``predicted_ids`` defaults to the
    recognizer output's tokens when ``rec`` is given.
    """
    if predicted_ids is None:
        if rec is None:
            raise InconsistentInput("need predicted_ids or a recognizer output")
        predicted_ids = rec.phonemes.phoneme_ids()
    if any(word_spans[i][1] != word_spans[i + 1][0] for i in range(len(word_spans) - 1)) or (
        word_spans and word_spans[0][0] != 0
    ):
        raise InconsistentInput("word spans must partition canonical positions in order")
    if word_spans and word_spans[-1][1] != len(canonical_ids):
        raise InconsistentInput("word spans do not cover the canonical sequence")

    max_canonical = -1
    for op in alignment.ops:
        if op.canonical_index is not None:
            max_canonical = max(max_canonical, op.canonical_index)
    if max_canonical >= len(canonical_ids):
        raise InconsistentInput("alignment refers to canonical positions outside the spans")

    def word_of(position: int) -> int:
        # spans are contiguous and sorted; linear scan is fine at word counts
        for w, (s, e) in enumerate(word_spans):
            if s <= position < e:
                return w
        raise InconsistentInput(f"canonical position {position} not covered by any span")

    posteriors = rec.posteriors if rec is not None else None

    offending: dict[int, list[tuple[AlignmentOp, float, tuple[int | None, int | None]]]] = {}
    cursor = 0
    for op in alignment.ops:
        if op.kind == MATCH:
            cursor += 1
            continue
        if op.kind == SUBSTITUTION:
            word = word_of(op.canonical_index)
            canonical_token = canonical_ids[op.canonical_index]
            if posteriors is not None:
                sev = 1.0 - float(posteriors[op.predicted_index][canonical_token])
            else:
                sev = min(op.cost, 1.0)
            pair = (canonical_token, predicted_ids[op.predicted_index])
            cursor += 1
        elif op.kind == DELETION:
            word = word_of(op.canonical_index)
            sev = min(op.cost, 1.0)
            pair = (canonical_ids[op.canonical_index], None)
            cursor += 1
        else:  # insertion: attribute to the left canonical neighbour's word
            anchor = max(cursor - 1, 0)
            word = word_of(anchor) if word_spans else 0
            sev = min(op.cost, 1.0)
            pair = (None, predicted_ids[op.predicted_index])
        offending.setdefault(word, []).append((op, sev, pair))

    reports = []
    for w in range(len(word_spans)):
        entries = offending.get(w, [])
        if not entries:
            reports.append(
                WordErrorReport(w, False, 0.0, BIN_NONE, (), ())
            )
            continue
        severity = max(sev for _, sev, _ in entries)
        reports.append(
            WordErrorReport(
                word_index=w,
                mispronounced=True,
                severity=severity,
                severity_bin=severity_bin(severity, bins),
                offending_ops=tuple(op for op, _, _ in entries),
                phoneme_pairs=tuple(pair for _, _, pair in entries),
            )
        )
    return reports


def gold_word_flags(ev: ErrorVector, word_spans: Sequence[tuple[int, int]]) -> list[bool]:
    """Ground-truth word flags: a word is bad iff any of its bits is set."""
    if len(ev.bits) != sum(e - s for s, e in word_spans):
        raise InconsistentInput("error vector length does not match word spans")
    return [any(ev.bits[s:e]) for s, e in word_spans]


def predicted_word_flags(reports: Sequence[WordErrorReport]) -> list[bool]:
    return [r.mispronounced for r in reports]


def alignment_to_error_ops(alignment: Alignment, predicted: PhonemeSequence) -> list[ErrorOp]:
    """Convert an alignment's non-match edits into the corpus edit-script
    vocabulary, for comparison against injected scripts."""
    predicted_ids = predicted.phoneme_ids()
    ops: list[ErrorOp] = []
    cursor = 0
    for op in alignment.ops:
        if op.kind == MATCH:
            cursor += 1
        elif op.kind == SUBSTITUTION:
            ops.append(ErrorOp(OP_SUBSTITUTION, op.canonical_index, predicted_ids[op.predicted_index]))
            cursor += 1
        elif op.kind == DELETION:
            ops.append(ErrorOp(OP_DELETION, op.canonical_index, None))
            cursor += 1
        else:
            ops.append(ErrorOp(ADDITION, cursor - 1, predicted_ids[op.predicted_index]))
    ops.sort(key=lambda o: (o.canonical_index, o.kind))
    return ops


def mock_recognize(
    pair: UtterancePair,
    fidelity: float,
    seed: int,
    inventory: PhonemeInventory,
    weights: FeatureWeightTable = DEFAULT_WEIGHTS,
) -> RecognizerOutput:
    """Stand-in for a neural phoneme recognizer.

    Emits the pair's corrupted sequence; each phoneme independently survives
    with probability ``fidelity`` and is otherwise replaced by a random
    confusable. The emitted token's posterior mass is drawn from
    [0.75, 0.99], the remainder spread uniformly over the other tokens.
    Deterministic for a given seed.
    """
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError("fidelity must lie in [0, 1]")
    rng = SplitMix64(seed)
    words = pair.corrupted.words()
    from .corpus import _confusables_cache

    confusables = _confusables_cache(inventory, weights)
    all_ids = [p.id for p in inventory.phonemes]

    out_words: list[list[int]] = []
    for word in words:
        out_word = []
        for token in word:
            if fidelity < 1.0 and rng.random() >= fidelity:
                candidates = confusables[token] or [t for t in all_ids if t != token]
                token = candidates[rng.randrange(len(candidates))]
            out_word.append(token)
        out_words.append(out_word)

    seq = PhonemeSequence.from_words(out_words)
    ids = seq.phoneme_ids()
    posteriors = np.zeros((len(ids), N_TOKENS))
    for row, token in enumerate(ids):
        mass = 0.75 + 0.24 * rng.random()
        posteriors[row, :] = (1.0 - mass) / (N_TOKENS - 1)
        posteriors[row, token] = mass
    return RecognizerOutput(phonemes=seq, posteriors=posteriors)


def http_recognize(url: str, wav_bytes: bytes, timeout: float = 30.0) -> RecognizerOutput:
    """POST WAV bytes to an external recognizer endpoint.

    The endpoint must answer with the recognizer wire format: a JSON object
    with ``tokens`` (token ids incl. markers) and ``posteriors`` (one
    length-67 row per phoneme position). Rows are renormalized on receipt.
    """
    import httpx

    from .errors import CaptError

    try:
        resp = httpx.post(url, content=wav_bytes,
                          headers={"content-type": "audio/wav"}, timeout=timeout)
        resp.raise_for_status()
        row = resp.json()
        posteriors = np.asarray(row["posteriors"], dtype=np.float64)
        if posteriors.size:
            posteriors = posteriors / posteriors.sum(axis=1, keepdims=True)
        return RecognizerOutput(
            phonemes=PhonemeSequence(tuple(row["tokens"])), posteriors=posteriors
        )
    except (httpx.HTTPError, KeyError, ValueError, TypeError) as exc:
        raise CaptError(f"recognizer unavailable: {exc}") from exc


# ---------------------------------------------------------------------------
# recognizer output wire format (JSON lines, 4-decimal posterior rows)


def write_recognizer_outputs(outputs: dict[str, RecognizerOutput], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sentence_id, rec in outputs.items():
            row = {
                "sentence_id": sentence_id,
                "tokens": list(rec.phonemes.tokens),
                "posteriors": [
                    [round(float(v), 4) for v in r] for r in rec.posteriors
                ],
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def read_recognizer_outputs(path: str | Path) -> dict[str, RecognizerOutput]:
    """Read recognizer outputs; 4-decimal rows are renormalized to sum to 1."""
    out: dict[str, RecognizerOutput] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        posteriors = np.asarray(row["posteriors"], dtype=np.float64)
        if posteriors.size:
            posteriors = posteriors / posteriors.sum(axis=1, keepdims=True)
        out[row["sentence_id"]] = RecognizerOutput(
            phonemes=PhonemeSequence(tuple(row["tokens"])), posteriors=posteriors
        )
    return out
