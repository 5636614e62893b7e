"""End-to-end attempt analysis shared by the CLI, the HTTP service and the
tests, so every surface produces the identical report JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .align import align, substitution_cost_matrix
from .detect import (
    DEFAULT_SEVERITY_BINS,
    RecognizerOutput,
    WordErrorReport,
    detect_word_errors,
)
from .feedback import KnowledgeBase, compose_feedback, load_knowledge_base
from .g2p import default_inventory, to_phonemes
from .inventory import (
    DEFAULT_WEIGHTS,
    FeatureWeightTable,
    PhonemeInventory,
    PhonemeSequence,
    encode,
)


@dataclass
class Analyzer:
    """Bundles the loaded inventory, knowledge base and cost tables."""

    inventory: PhonemeInventory = field(default_factory=default_inventory)
    kb: KnowledgeBase | None = None
    weights: FeatureWeightTable = DEFAULT_WEIGHTS
    severity_bins: tuple[float, float] = DEFAULT_SEVERITY_BINS

    def __post_init__(self):
        if self.kb is None:
            self.kb = load_knowledge_base(inventory=self.inventory)
        self._sub_costs = substitution_cost_matrix(self.inventory, self.weights)

    def canonical_for(self, text: str) -> PhonemeSequence:
        return to_phonemes(text, self.inventory).sequence

    def sequence_from_ipa(self, symbols: Sequence[str]) -> PhonemeSequence:
        """Build a sequence from flat IPA symbols with "|" word separators."""
        words: list[list[str]] = [[]]
        for sym in symbols:
            if sym == "|":
                words.append([])
            else:
                words[-1].append(sym)
        return encode([w for w in words if w], self.inventory)

    def analyze(
        self,
        canonical: PhonemeSequence,
        predicted: PhonemeSequence,
        rec: RecognizerOutput | None = None,
    ) -> dict:
        """Align, detect word errors and compose feedback. Returns the
        report payload used verbatim by every interface."""
        alignment = align(canonical, predicted, self.inventory, sub_costs=self._sub_costs)
        reports = detect_word_errors(
            alignment,
            canonical.word_spans,
            canonical_ids=canonical.phoneme_ids(),
            predicted_ids=predicted.phoneme_ids(),
            rec=rec,
            bins=self.severity_bins,
        )
        return self.report_payload(canonical, predicted, reports)

    def report_payload(
        self,
        canonical: PhonemeSequence,
        predicted: PhonemeSequence,
        reports: Sequence[WordErrorReport],
    ) -> dict:
        feedback = []
        for report in reports:
            for expected, produced in report.phoneme_pairs:
                if expected is None:
                    # pure insertion: no canonical target to coach toward
                    continue
                message = compose_feedback(expected, produced, self.kb)
                entry = message.to_dict(self.inventory)
                entry["word_index"] = report.word_index
                feedback.append(entry)

        words = [r.to_dict(self.inventory) for r in reports]
        for word_report, ipa_word in zip(words, decode_words(canonical, self.inventory)):
            word_report["expected_phonemes"] = ipa_word
        flagged = [w["word_index"] for w in words if w["mispronounced"]]
        return {
            "words": words,
            "feedback": feedback,
            "summary": {
                "n_words": len(words),
                "n_flagged": len(flagged),
                "flagged_words": flagged,
                "predicted_phonemes": [
                    [self.inventory.get(t).ipa for t in word] for word in predicted.words()
                ],
            },
        }


def decode_words(seq: PhonemeSequence, inventory: PhonemeInventory) -> list[list[str]]:
    return [[inventory.get(t).ipa for t in word] for word in seq.words()]


def report_json_bytes(payload: dict) -> bytes:
    """Canonical byte serialization of a report payload; the service returns
    exactly these bytes so library and service output stay identical."""
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
