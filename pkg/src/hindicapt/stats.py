"""Detection metrics and the pre/post self-rating analysis.

The Wilcoxon signed-rank test follows Pratt's treatment of zeros: zero
differences are ranked together with the rest (tied ranks averaged) and then
dropped from the statistic. Up to 20 samples the p-value is exact, computed
from the full null distribution of the positive-rank sum; beyond that a
normal approximation with zero, tie and continuity corrections is used.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from statistics import NormalDist
from typing import Iterable, Sequence

from .errors import InconsistentInput, MalformedEntry

log = logging.getLogger(__name__)

EXACT_LIMIT = 20

TWO_SIDED = "two_sided"
GREATER = "greater"


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def add(self, gold: bool, predicted: bool) -> None:
        if gold and predicted:
            self.tp += 1
        elif not gold and predicted:
            self.fp += 1
        elif gold and not predicted:
            self.fn += 1
        else:
            self.tn += 1

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if (p + r) else 0.0


def compute_metrics(
    gold: Sequence[bool],
    predicted: Sequence[bool],
    alignment_counts: dict | None = None,
) -> dict:
    """Word-level precision/recall/F1, with the 0/0 -> 0 convention.

    ``alignment_counts`` may carry accumulated edit counts
    {"substitutions", "deletions", "insertions", "canonical_length"}; when
    present the phoneme error rate (S+D+I)/N is included.
    """
    if len(gold) != len(predicted):
        raise InconsistentInput(
            f"gold has {len(gold)} flags, predicted has {len(predicted)}"
        )
    counts = ConfusionCounts()
    for g, p in zip(gold, predicted):
        counts.add(bool(g), bool(p))
    out = {
        "precision": counts.precision,
        "recall": counts.recall,
        "f1": counts.f1,
        "counts": {"tp": counts.tp, "fp": counts.fp, "fn": counts.fn, "tn": counts.tn},
    }
    if alignment_counts is not None:
        n = alignment_counts.get("canonical_length", 0)
        edits = (
            alignment_counts.get("substitutions", 0)
            + alignment_counts.get("deletions", 0)
            + alignment_counts.get("insertions", 0)
        )
        out["per"] = edits / n if n else 0.0
    return out


@dataclass(frozen=True)
class PairedSample:
    participant_id: str
    phoneme: str
    pre: int
    post: int

    def __post_init__(self):
        for name, score in (("pre", self.pre), ("post", self.post)):
            if not 1 <= score <= 5:
                raise MalformedEntry(f"{name} score {score} outside the 1-5 scale")


@dataclass(frozen=True)
class WilcoxonResult:
    w_statistic: float  # sum of ranks of positive differences (Pratt)
    n_nonzero: int
    p_value: float
    method: str  # "exact" | "normal_approx"
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "w_statistic": self.w_statistic,
            "n_nonzero": self.n_nonzero,
            "p_value": self.p_value,
            "method": self.method,
            "degenerate": self.degenerate,
        }


def _pratt_ranks(diffs: Sequence[int | float]) -> tuple[list[float], list[float]]:
    """Rank |d| including zeros with average ranks for ties; return the
    (positive-sign ranks, all nonzero ranks)."""
    order = sorted(range(len(diffs)), key=lambda i: abs(diffs[i]))
    ranks = [0.0] * len(diffs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and abs(diffs[order[j + 1]]) == abs(diffs[order[i]]):
            j += 1
        avg = (i + j) / 2 + 1  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    positive = [ranks[i] for i in range(len(diffs)) if diffs[i] > 0]
    nonzero = [ranks[i] for i in range(len(diffs)) if diffs[i] != 0]
    return positive, nonzero


def _exact_tail_probs(nonzero_ranks: Sequence[float], w: float) -> tuple[float, float]:
    """P(W <= w) and P(W >= w) under random signs on the nonzero ranks.

    Ranks with tie-averaging step in halves, so everything is doubled to
    work over integers; the null distribution is built by convolution.
    """
    doubled = [round(2 * r) for r in nonzero_ranks]
    total = sum(doubled)
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in doubled:
        nxt = counts[:]
        for s in range(total - r + 1):
            if counts[s]:
                nxt[s + r] += counts[s]
        counts = nxt
    n_assignments = 1 << len(doubled)
    w2 = 2 * w
    le = sum(c for s, c in enumerate(counts) if s <= w2 + 1e-9)
    ge = sum(c for s, c in enumerate(counts) if s >= w2 - 1e-9)
    return le / n_assignments, ge / n_assignments


def wilcoxon_pratt(
    samples: Sequence[PairedSample] | Sequence[int],
    alternative: str = TWO_SIDED,
) -> WilcoxonResult:
    """Wilcoxon signed-rank test on post-pre differences, Pratt zeros.

    Accepts PairedSample records or raw integer differences. When every
    difference is zero the result is flagged degenerate with p = 1.
    """
    if alternative not in (TWO_SIDED, GREATER):
        raise ValueError(f"alternative must be {TWO_SIDED!r} or {GREATER!r}")
    if not samples:
        raise InconsistentInput("need at least one sample")
    if isinstance(samples[0], PairedSample):
        diffs = [s.post - s.pre for s in samples]
    else:
        diffs = [float(d) for d in samples]

    n_total = len(diffs)
    method = "exact" if n_total <= EXACT_LIMIT else "normal_approx"
    positive, nonzero = _pratt_ranks(diffs)
    w = float(sum(positive))

    if not nonzero:
        return WilcoxonResult(0.0, 0, 1.0, method, degenerate=True)

    if method == "exact":
        p_le, p_ge = _exact_tail_probs(nonzero, w)
        if alternative == GREATER:
            p = p_ge
        else:
            p = min(1.0, 2.0 * min(p_le, p_ge))
        return WilcoxonResult(w, len(nonzero), p, method)

    # normal approximation with Pratt's zero correction, tie correction
    # and a continuity correction of 1/2 toward the mean
    m = n_total
    z_count = m - len(nonzero)
    mean = (m * (m + 1) - z_count * (z_count + 1)) / 4.0
    var = (m * (m + 1) * (2 * m + 1) - z_count * (z_count + 1) * (2 * z_count + 1)) / 24.0
    tie_groups: dict[float, int] = {}
    for d in diffs:
        if d != 0:
            tie_groups[abs(d)] = tie_groups.get(abs(d), 0) + 1
    var -= sum(t**3 - t for t in tie_groups.values()) / 48.0
    if var <= 0:
        return WilcoxonResult(w, len(nonzero), 1.0, method, degenerate=True)
    sd = math.sqrt(var)
    cc = 0.5 if w != mean else 0.0
    if alternative == GREATER:
        z = (w - mean - cc) / sd
        p = 1.0 - NormalDist().cdf(z)
    else:
        z = (abs(w - mean) - cc) / sd
        p = 2.0 * (1.0 - NormalDist().cdf(z))
    return WilcoxonResult(w, len(nonzero), min(1.0, max(0.0, p)), method)


def summarize_likert(samples: Iterable[PairedSample]) -> dict:
    """Per-phoneme pre/post summaries plus the overall pre and post groups.

    Means and sample standard deviations (n-1 denominator) are also given
    preformatted as "m.mm ± s.ss".
    """
    samples = list(samples)
    by_phoneme: dict[str, list[PairedSample]] = {}
    for s in samples:
        by_phoneme.setdefault(s.phoneme, []).append(s)

    def group(scores: list[int]) -> dict:
        n = len(scores)
        mean = sum(scores) / n
        sd = math.sqrt(sum((x - mean) ** 2 for x in scores) / (n - 1)) if n > 1 else 0.0
        return {"n": n, "mean": mean, "sd": sd, "formatted": f"{mean:.2f} ± {sd:.2f}"}

    per_phoneme = {}
    for phoneme, rows in sorted(by_phoneme.items()):
        pre = group([r.pre for r in rows])
        post = group([r.post for r in rows])
        per_phoneme[phoneme] = {
            "pre": pre,
            "post": post,
            "delta_mean": post["mean"] - pre["mean"],
        }
    out: dict = {"per_phoneme": per_phoneme}
    if samples:
        out["overall"] = {
            "pre": group([s.pre for s in samples]),
            "post": group([s.post for s in samples]),
        }
    else:
        log.warning("no rating samples; omitting summary groups")
    return out


def read_survey_csv(path: str | Path) -> list[PairedSample]:
    """Read ratings from a header-first CSV: participant_id,phoneme,pre,post."""
    rows: list[PairedSample] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"participant_id", "phoneme", "pre", "post"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise MalformedEntry(
                f"survey CSV must have columns {sorted(required)}, got {reader.fieldnames}"
            )
        for row in reader:
            rows.append(
                PairedSample(
                    participant_id=row["participant_id"],
                    phoneme=row["phoneme"],
                    pre=int(row["pre"]),
                    post=int(row["post"]),
                )
            )
    return rows
