"""Articulatory feedback: knowledge base, contrastive messages, and
procedurally rendered sagittal tongue diagrams.

The knowledge base is a data file with one row per inventory phoneme
(``data/articulation_kb.tsv``): descriptor tags, guidance text for tongue,
lips, teeth, airflow and voicing (English and Hindi), common confusions, and
the diagram parameters. Loading validates full coverage of the inventory and
coherence between stored descriptors and the phoneme features.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import IncompleteKnowledgeBase, MalformedEntry, UnknownPhoneme
from .inventory import N_PHONEMES, PhonemeFeatures, PhonemeInventory

LIP_SHAPES = ("spread", "neutral", "rounded", "closed")


@dataclass(frozen=True)
class DiagramParams:
    tongue_spline: tuple[tuple[float, float], ...]  # 5 x-monotone points in [0,1]^2
    velum_open: bool
    lips: str
    constriction: tuple[float, float] | None

    def __post_init__(self):
        if len(self.tongue_spline) != 5:
            raise MalformedEntry("tongue spline needs exactly 5 control points")
        xs = [x for x, _ in self.tongue_spline]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise MalformedEntry("tongue spline control points must be x-monotone")
        for x, y in self.tongue_spline:
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise MalformedEntry("control points must lie in the unit square")
        if self.lips not in LIP_SHAPES:
            raise MalformedEntry(f"bad lips shape {self.lips!r}")


@dataclass(frozen=True)
class ArticulatoryEntry:
    phoneme_id: int
    descriptors: tuple[str, ...]
    tongue_text: str
    lips_text: str
    teeth_text: str
    airflow_text: str
    voicing_text: str
    common_errors: tuple[tuple[int, str], ...]  # (confusable id, hint)
    diagram: DiagramParams


@dataclass(frozen=True)
class ContrastPoint:
    feature: str
    expected_value: str
    produced_value: str
    instruction: str

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "expected_value": self.expected_value,
            "produced_value": self.produced_value,
            "instruction": self.instruction,
        }


@dataclass(frozen=True)
class FeedbackMessage:
    expected: int
    produced: int | None
    headline: str
    contrast_points: tuple[ContrastPoint, ...]
    guidance: tuple[str, ...]
    diagram_refs: tuple[str, ...]

    def to_dict(self, inventory: PhonemeInventory | None = None) -> dict:
        def ipa(token):
            if token is None or inventory is None:
                return token
            return inventory.get(token).ipa

        return {
            "expected": ipa(self.expected),
            "produced": ipa(self.produced),
            "headline": self.headline,
            "contrast_points": [c.to_dict() for c in self.contrast_points],
            "guidance": list(self.guidance),
            "diagram_refs": list(self.diagram_refs),
        }


def derive_descriptors(features: PhonemeFeatures) -> tuple[str, ...]:
    """Descriptor tags implied by a feature row; the stored tags must match."""
    tags = ["voiced" if features.voiced else "unvoiced"]
    if features.category == "consonant":
        tags.append(features.place)
        if features.aspirated:
            tags.append("aspirated")
        tags.append(features.manner)
    else:
        if features.length != "none":
            tags.append(features.length)
        if features.nasalized:
            tags.append("nasalized")
        if features.rounded:
            tags.append("rounded")
        tags.append(features.category)
    return tuple(tags)


class KnowledgeBase:
    def __init__(self, entries: dict[int, ArticulatoryEntry], inventory: PhonemeInventory,
                 locale: str = "en"):
        missing = set(range(N_PHONEMES)) - set(entries)
        if missing:
            raise IncompleteKnowledgeBase(missing)
        extra = set(entries) - set(range(N_PHONEMES))
        if extra:
            raise MalformedEntry(f"knowledge base has entries for unknown ids {sorted(extra)}")
        self.entries = entries
        self.inventory = inventory
        self.locale = locale
        for pid, entry in entries.items():
            feats = inventory.get(pid).features
            if entry.descriptors != derive_descriptors(feats):
                raise MalformedEntry(
                    f"descriptors for id {pid} do not match the phoneme features: "
                    f"{entry.descriptors} vs {derive_descriptors(feats)}"
                )
            if entry.diagram.velum_open != (feats.manner == "nasal" or feats.nasalized):
                raise MalformedEntry(f"velum_open flag wrong for id {pid}")

    def get(self, phoneme_id: int) -> ArticulatoryEntry:
        if phoneme_id not in self.entries:
            raise UnknownPhoneme(str(phoneme_id))
        return self.entries[phoneme_id]


def get_entry(phoneme_id: int, kb: KnowledgeBase) -> ArticulatoryEntry:
    return kb.get(phoneme_id)


def _parse_spline(text: str) -> tuple[tuple[float, float], ...]:
    pts = []
    for part in text.split(","):
        x, _, y = part.partition(":")
        pts.append((float(x), float(y)))
    return tuple(pts)


def _parse_common_errors(text: str, inventory: PhonemeInventory, locale: str):
    if not text or text == "-":
        return ()
    out = []
    for item in text.split("|"):
        fields = item.split("::")
        if len(fields) != 3:
            raise MalformedEntry(f"bad common_errors item {item!r}")
        ipa, hint_en, hint_hi = fields
        out.append((inventory.by_ipa(ipa).id, hint_hi if locale == "hi" else hint_en))
    return tuple(out)


def load_knowledge_base(
    source: str | Path | None = None,
    inventory: PhonemeInventory | None = None,
    locale: str = "en",
) -> KnowledgeBase:
    """Load the articulation knowledge base for one locale ("en" or "hi")."""
    if locale not in ("en", "hi"):
        raise ValueError(f"unsupported locale {locale!r}")
    if inventory is None:
        from .g2p import default_inventory

        inventory = default_inventory()
    if source is None:
        text = resources.files("hindicapt").joinpath("data/articulation_kb.tsv").read_text("utf-8")
    else:
        text = Path(source).read_text(encoding="utf-8")

    pick = (lambda en, hi: hi) if locale == "hi" else (lambda en, hi: en)
    entries: dict[int, ArticulatoryEntry] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 18:
            raise MalformedEntry(f"line {line_no}: expected 18 fields, got {len(cols)}")
        (raw_id, _ipa, descriptors, tongue_en, tongue_hi, lips_en, lips_hi, teeth_en,
         teeth_hi, airflow_en, airflow_hi, voicing_en, voicing_hi, confusions,
         spline, velum, lips_shape, constriction) = cols
        pid = int(raw_id)
        texts = [
            pick(tongue_en, tongue_hi),
            pick(lips_en, lips_hi),
            pick(teeth_en, teeth_hi),
            pick(airflow_en, airflow_hi),
            pick(voicing_en, voicing_hi),
        ]
        if any(not t for t in texts):
            raise MalformedEntry(f"line {line_no}: empty guidance text")
        constr = None
        if constriction != "-":
            x, _, y = constriction.partition(":")
            constr = (float(x), float(y))
        if pid in entries:
            raise MalformedEntry(f"line {line_no}: duplicate entry for id {pid}")
        entries[pid] = ArticulatoryEntry(
            phoneme_id=pid,
            descriptors=tuple(descriptors.split(",")),
            tongue_text=texts[0],
            lips_text=texts[1],
            teeth_text=texts[2],
            airflow_text=texts[3],
            voicing_text=texts[4],
            common_errors=_parse_common_errors(confusions, inventory, locale),
            diagram=DiagramParams(
                tongue_spline=_parse_spline(spline),
                velum_open=velum == "1",
                lips=lips_shape,
                constriction=constr,
            ),
        )
    return KnowledgeBase(entries, inventory, locale)


# feature name -> which guidance text carries the corrective instruction
_FEATURE_TEXT = {
    "category": "tongue_text",
    "place": "tongue_text",
    "manner": "airflow_text",
    "voiced": "voicing_text",
    "aspirated": "airflow_text",
    "nasalized": "airflow_text",
    "rounded": "lips_text",
}


def _feature_value(features: PhonemeFeatures, name: str) -> str:
    value = getattr(features, name)
    if isinstance(value, bool):
        return name if value else f"not {name}"
    return str(value)


def diagram_ref(phoneme_id: int) -> str:
    return f"/api/phonemes/{phoneme_id}/diagram.svg"


def compose_feedback(expected: int, produced: int | None, kb: KnowledgeBase) -> FeedbackMessage:
    """Build a contrastive feedback message for one detected confusion.

    ``produced=None`` means the learner dropped the sound entirely and gets
    the full articulation walk-through; a substitution gets one contrast
    point per differing feature, each carrying the instruction text of the
    feature it corrects.
    """
    exp_entry = kb.get(expected)
    exp_ph = kb.inventory.get(expected)
    full_guidance = (
        exp_entry.tongue_text,
        exp_entry.lips_text,
        exp_entry.teeth_text,
        exp_entry.airflow_text,
        exp_entry.voicing_text,
    )

    if produced is None:
        return FeedbackMessage(
            expected=expected,
            produced=None,
            headline=f"The sound /{exp_ph.ipa}/ was missing. Slow down and give it its own beat.",
            contrast_points=(),
            guidance=full_guidance,
            diagram_refs=(diagram_ref(expected),),
        )

    if produced == expected:
        return FeedbackMessage(
            expected=expected,
            produced=produced,
            headline=f"/{exp_ph.ipa}/ pronounced correctly.",
            contrast_points=(),
            guidance=(),
            diagram_refs=(diagram_ref(expected),),
        )

    prod_ph = kb.inventory.get(produced)
    points = []
    for name in exp_ph.features.differing(prod_ph.features):
        if name == "length":
            want = exp_ph.features.length
            instruction = (
                f"Hold the vowel {'longer — give it a full beat' if want == 'long' else 'shorter — just a quick touch'}."
            )
        else:
            instruction = getattr(exp_entry, _FEATURE_TEXT[name])
        points.append(
            ContrastPoint(
                feature=name,
                expected_value=_feature_value(exp_ph.features, name),
                produced_value=_feature_value(prod_ph.features, name),
                instruction=instruction,
            )
        )
    return FeedbackMessage(
        expected=expected,
        produced=produced,
        headline=f"You said /{prod_ph.ipa}/ where /{exp_ph.ipa}/ belongs.",
        contrast_points=tuple(points),
        guidance=full_guidance,
        diagram_refs=(diagram_ref(expected), diagram_ref(produced)),
    )


# ---------------------------------------------------------------------------
# sagittal diagram rendering


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _px(pt: tuple[float, float]) -> tuple[float, float]:
    # normalized head coordinates: x 0=lips .. 1=throat, y 0=jaw .. 1=palate
    x, y = pt
    return 14.0 + 74.0 * x, 88.0 - 66.0 * y


def _smooth_path(points: list[tuple[float, float]]) -> str:
    """Catmull-Rom spline through the points, emitted as cubic Beziers."""
    if len(points) < 2:
        return ""
    pts = [points[0]] + points + [points[-1]]
    d = [f"M {_fmt(points[0][0])} {_fmt(points[0][1])}"]
    for i in range(1, len(pts) - 2):
        p0, p1, p2, p3 = pts[i - 1], pts[i], pts[i + 1], pts[i + 2]
        c1 = (p1[0] + (p2[0] - p0[0]) / 6.0, p1[1] + (p2[1] - p0[1]) / 6.0)
        c2 = (p2[0] - (p3[0] - p1[0]) / 6.0, p2[1] - (p3[1] - p1[1]) / 6.0)
        d.append(
            f"C {_fmt(c1[0])} {_fmt(c1[1])}, {_fmt(c2[0])} {_fmt(c2[1])}, "
            f"{_fmt(p2[0])} {_fmt(p2[1])}"
        )
    return " ".join(d)

# Fixed sagittal head outline (profile facing left), palate line included.
_HEAD_PATH = (
    "M 30 6 C 14 10, 8 24, 10 36 L 10 44 C 10 47, 12 48, 15 48 "
    "L 13 58 L 18 60 L 15 64 L 19 66 C 17 72, 18 78, 24 82 "
    "L 30 96 L 78 96 L 92 80 C 97 60, 97 30, 84 14 C 70 2, 44 0, 30 6 Z"
)
_PALATE_PATH = "M 20 52 C 30 38, 52 30, 72 32 L 80 36"


def render_tongue_diagram(entry: ArticulatoryEntry, size: int = 320) -> str:
    """Render the entry's sagittal tongue diagram as an SVG document.

    Output is deterministic: same entry and size give byte-identical SVG.
    """
    if size < 64:
        raise ValueError("diagram size must be at least 64 px")
    d = entry.diagram
    top = [_px(p) for p in d.tongue_spline]
    root = (top[-1][0] + 2.0, min(top[-1][1] + 16.0, 88.0))
    floor_left = (top[0][0] - 1.0, 86.0)
    tongue_d = (
        _smooth_path(top)
        + f" C {_fmt(root[0] - 2)} {_fmt(root[1] - 8)}, {_fmt(root[0])} {_fmt(root[1] - 4)}, "
        + f"{_fmt(root[0])} {_fmt(root[1])}"
        + f" L {_fmt(floor_left[0])} {_fmt(floor_left[1])} Z"
    )

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        'viewBox="0 0 100 100">',
        "<title>sagittal articulation diagram</title>",
        f'<path d="{_HEAD_PATH}" fill="#fdf0e4" stroke="#5b4637" stroke-width="1.2"/>',
        f'<path d="{_PALATE_PATH}" fill="none" stroke="#5b4637" stroke-width="1.0"/>',
        f'<path id="tongue" d="{tongue_d}" fill="#e88a8a" stroke="#a33" stroke-width="1.0"/>',
    ]

    # velum: small flap at the back of the palate; lowered when air goes nasal
    if d.velum_open:
        parts.append('<path d="M 80 36 C 82 42, 81 47, 77 51" fill="none" stroke="#5b4637" stroke-width="1.0"/>')
        parts.append('<path d="M 82 28 L 82 20" fill="none" stroke="#4a7" stroke-width="1.4" stroke-dasharray="2 1.2"/>')
    else:
        parts.append('<path d="M 80 36 C 84 38, 87 41, 88 46" fill="none" stroke="#5b4637" stroke-width="1.0"/>')

    lips_glyphs = {
        "closed": '<ellipse cx="13" cy="56" rx="3.2" ry="2.0" fill="#c66"/>'
        '<ellipse cx="13" cy="60" rx="3.2" ry="2.0" fill="#c66"/>',
        "rounded": '<ellipse cx="13" cy="58" rx="3.4" ry="4.4" fill="none" stroke="#c66" stroke-width="1.6"/>',
        "spread": '<path d="M 9 56 L 17 55" stroke="#c66" stroke-width="1.6" fill="none"/>'
        '<path d="M 9 61 L 17 62" stroke="#c66" stroke-width="1.6" fill="none"/>',
        "neutral": '<path d="M 9 56 Q 13 55, 17 56" stroke="#c66" stroke-width="1.6" fill="none"/>'
        '<path d="M 9 61 Q 13 62, 17 61" stroke="#c66" stroke-width="1.6" fill="none"/>',
    }
    parts.append(lips_glyphs[d.lips])

    if d.constriction is not None:
        cx, cy = _px(d.constriction)
        parts.append(
            f'<circle class="constriction" cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="3.0" '
            'fill="#ffb347" fill-opacity="0.85" stroke="#d97706" stroke-width="0.8"/>'
        )

    parts.append("</svg>")
    return "\n".join(parts)
