"""Global alignment of predicted against canonical phoneme sequences.

Plain dynamic programming over the two sequences with unit indel costs and
substitution cost 0.5 + 0.5 * feature_distance, so swapping one phoneme for
another is never cheaper than half an insert/delete and never more expensive
than one. Marker tokens are stripped before aligning; word structure is
re-attached downstream from the canonical word spans.

Backtrace tie-break: match/substitution is preferred over deletion, deletion
over insertion. Walking from the end of the matrix, this pins edits in runs
of identical phonemes to the leftmost equivalent position, which keeps
recovered edit scripts deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .inventory import (
    DEFAULT_WEIGHTS,
    FeatureWeightTable,
    N_PHONEMES,
    PhonemeInventory,
    PhonemeSequence,
    feature_distance,
)

INDEL_COST = 1.0
SUB_COST_FLOOR = 0.5

MATCH = "match"
SUBSTITUTION = "substitution"
INSERTION = "insertion"
DELETION = "deletion"


@dataclass(frozen=True)
class AlignmentOp:
    kind: str
    canonical_index: int | None
    predicted_index: int | None
    cost: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "canonical_index": self.canonical_index,
            "predicted_index": self.predicted_index,
            "cost": self.cost,
        }


@dataclass(frozen=True)
class Alignment:
    ops: tuple[AlignmentOp, ...]
    total_cost: float


def substitution_cost_matrix(
    inventory: PhonemeInventory, weights: FeatureWeightTable = DEFAULT_WEIGHTS
) -> np.ndarray:
    """(64, 64) matrix of substitution costs; 0 on the diagonal.

    Cached per (inventory, weights) pair since it is reused for every
    alignment over a corpus.
    """
    cache = getattr(inventory, "_sub_cost_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(inventory, "_sub_cost_cache", cache)
    m = cache.get(weights)
    if m is not None:
        return m
    m = np.zeros((N_PHONEMES, N_PHONEMES))
    for a in inventory:
        for b in inventory:
            if a.id != b.id:
                m[a.id, b.id] = SUB_COST_FLOOR + 0.5 * feature_distance(a, b, weights)
    cache[weights] = m
    return m


def _strip(seq) -> tuple[int, ...]:
    if isinstance(seq, PhonemeSequence):
        return seq.phoneme_ids()
    return tuple(seq)


def align(
    canonical,
    predicted,
    inventory: PhonemeInventory,
    weights: FeatureWeightTable = DEFAULT_WEIGHTS,
    sub_costs: np.ndarray | None = None,
) -> Alignment:
    """Minimal-cost global alignment between two phoneme id sequences.

    Accepts PhonemeSequence objects (marker tokens are stripped) or plain
    id sequences. ``sub_costs`` can be passed to reuse a precomputed
    substitution matrix across many calls.
    """
    a = _strip(canonical)
    b = _strip(predicted)
    if sub_costs is None:
        sub_costs = substitution_cost_matrix(inventory, weights)
    n, m = len(a), len(b)

    dist = np.empty((n + 1, m + 1))
    dist[0, :] = np.arange(m + 1) * INDEL_COST
    dist[:, 0] = np.arange(n + 1) * INDEL_COST
    for i in range(1, n + 1):
        row = dist[i]
        prev = dist[i - 1]
        costs_i = sub_costs[a[i - 1]]
        for j in range(1, m + 1):
            row[j] = min(
                prev[j - 1] + costs_i[b[j - 1]],
                prev[j] + INDEL_COST,
                row[j - 1] + INDEL_COST,
            )

    ops: list[AlignmentOp] = []
    i, j = n, m
    eps = 1e-12
    while i > 0 or j > 0:
        here = dist[i, j]
        if i > 0 and j > 0:
            sub = sub_costs[a[i - 1], b[j - 1]]
            if abs(here - (dist[i - 1, j - 1] + sub)) < eps:
                kind = MATCH if a[i - 1] == b[j - 1] else SUBSTITUTION
                ops.append(AlignmentOp(kind, i - 1, j - 1, float(sub)))
                i -= 1
                j -= 1
                continue
        if i > 0 and abs(here - (dist[i - 1, j] + INDEL_COST)) < eps:
            ops.append(AlignmentOp(DELETION, i - 1, None, INDEL_COST))
            i -= 1
            continue
        ops.append(AlignmentOp(INSERTION, None, j - 1, INDEL_COST))
        j -= 1

    ops.reverse()
    return Alignment(ops=tuple(ops), total_cost=float(dist[n, m]))
