"""Command line interface.

Every command is a thin shell over the library: machine-readable output goes
to files, a short human summary to stdout. Exit codes: 0 success, 1 input
error, 2 internal error. Commands honoring --seed are fully deterministic.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from .errors import CaptError


def _fail_input(message: str) -> "SystemExit":
    click.echo(f"error: {message}", err=True)
    return SystemExit(1)


def _guard(fn):
    """Map domain errors to exit 1, unexpected ones to exit 2."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (CaptError, OSError, ValueError) as exc:
            raise _fail_input(str(exc))
        except (SystemExit, KeyboardInterrupt, click.ClickException):
            raise
        except Exception as exc:  # noqa: BLE001 - deliberate catch-all at the boundary
            click.echo(f"internal error: {exc}", err=True)
            raise SystemExit(2)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@click.group()
def main():
    """Hindi pronunciation-training toolkit."""


@main.command()
@click.option("--text", required=True, help="Devanagari input text.")
@click.option("--no-schwa-deletion", is_flag=True, help="Keep every inherent schwa.")
@click.option("--inventory", "inventory_path", type=click.Path(exists=True), default=None)
@click.option("--lexicon", type=click.Path(exists=True), default=None,
              help="Exceptions lexicon consulted before the rules.")
@_guard
def g2p(text, no_schwa_deletion, inventory_path, lexicon):
    """Convert Devanagari text to phonemes (| marks word boundaries)."""
    from .g2p import load_lexicon, to_phonemes
    from .inventory import load_inventory

    inv = load_inventory(inventory_path)
    lex = load_lexicon(lexicon) if lexicon else None
    result = to_phonemes(text, inv, schwa_deletion=not no_schwa_deletion, lexicon=lex)
    words = [[inv.get(t).ipa for t in w] for w in result.sequence.words()]
    click.echo(" | ".join(" ".join(w) for w in words))


@main.command()
@click.option("--sentences", "sentences_path", required=True, type=click.Path(exists=True),
              help="UTF-8 file with one Devanagari sentence per line.")
@click.option("--pairs", "n_pairs", type=int, required=True)
@click.option("--p", "p_error", type=float, default=0.05, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--speakers", type=int, default=10, show_default=True)
@click.option("--tts-url", default=None, help="External TTS endpoint; omit for no audio.")
@click.option("--tts-stub", is_flag=True, help="Synthesize offline stub audio.")
@click.option("--policy", type=click.Choice(["confusable", "uniform"]), default="confusable",
              show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--jobs", type=int, default=1, show_default=True)
@_guard
def synth(sentences_path, n_pairs, p_error, seed, speakers, tts_url, tts_stub, policy,
          out_dir, jobs):
    """Build a paired corpus with injected phoneme errors."""
    from .corpus import HttpTtsClient, SineTtsStub, build_corpus, write_manifest
    from .inventory import load_inventory

    lines = [ln.strip() for ln in Path(sentences_path).read_text(encoding="utf-8").splitlines()]
    sentences = [ln for ln in lines if ln and not ln.startswith("#")]
    if not sentences:
        raise _fail_input(f"{sentences_path} contains no sentences")

    inv = load_inventory()
    tts = None
    if tts_url:
        tts = HttpTtsClient(tts_url)
    elif tts_stub:
        tts = SineTtsStub(inv)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = build_corpus(
        sentences,
        n_pairs=n_pairs,
        p=p_error,
        seed=seed,
        inventory=inv,
        speakers=tuple(range(speakers)),
        tts=tts,
        out_dir=out,
        confusion_policy=policy,
        jobs=jobs,
    )
    path = out / "manifest.jsonl"
    write_manifest(manifest, path)
    click.echo(f"wrote {len(manifest.entries)} pairs to {path}")


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--variants", type=int, default=1, show_default=True,
              help="Augmented variants per entry.")
@click.option("--gain", type=float, default=None, help="Fixed gain in dB; default random.")
@click.option("--speed", type=float, default=None, help="Fixed speed factor; default random.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", default=None, type=click.Path(),
              help="Output directory; defaults to the manifest's directory.")
@_guard
def augment(manifest_path, variants, gain, speed, seed, out_dir):
    """Add gain/speed perturbed audio variants to a corpus."""
    from .audio import AugmentSpec
    from .corpus import augment_corpus, read_manifest, write_manifest

    manifest = read_manifest(manifest_path)
    manifest_dir = Path(manifest_path).parent
    out = Path(out_dir) if out_dir else manifest_dir
    out.mkdir(parents=True, exist_ok=True)
    specs = [AugmentSpec(gain_db=gain, speed_factor=speed) for _ in range(variants)]
    grown, skipped = augment_corpus(manifest, specs, seed, manifest_dir, out)
    path = out / "manifest.augmented.jsonl"
    write_manifest(grown, path)
    click.echo(f"wrote {len(grown.entries)} rows to {path}"
               + (f" ({len(skipped)} entries skipped, no audio)" if skipped else ""))


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--recognizer", default="mock", show_default=True,
              help="'mock', a recognizer HTTP URL, or a recognizer-output JSONL file.")
@click.option("--fidelity", type=float, default=1.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--jobs", type=int, default=1, show_default=True)
@_guard
def detect(manifest_path, recognizer, fidelity, seed, report_path, jobs):
    """Detect word-level errors over a corpus and score against ground truth."""
    from .analysis import Analyzer
    from .corpus import read_manifest
    from .detect import (
        detect_word_errors,
        gold_word_flags,
        http_recognize,
        mock_recognize,
        predicted_word_flags,
        read_recognizer_outputs,
    )
    from .align import align
    from .rng import derive_seed
    from .stats import compute_metrics

    manifest = read_manifest(manifest_path)
    if not manifest.entries:
        raise _fail_input(f"{manifest_path} has no entries")
    analyzer = Analyzer()
    inv = analyzer.inventory
    manifest_dir = Path(manifest_path).parent
    external = None
    remote_url = None
    if recognizer.startswith(("http://", "https://")):
        remote_url = recognizer
    elif recognizer != "mock":
        external = read_recognizer_outputs(recognizer)

    def process(entry):
        if remote_url is not None:
            if not entry.audio_paths:
                return None
            wav_bytes = (manifest_dir / entry.audio_paths["mispronounced"]).read_bytes()
            rec = http_recognize(remote_url, wav_bytes)
        elif external is not None:
            rec = external.get(entry.sentence_id)
            if rec is None:
                return None
        else:
            rec = mock_recognize(entry, fidelity, derive_seed(seed, entry.sentence_id), inv)
        alignment = align(entry.canonical, rec.phonemes, inv, sub_costs=analyzer._sub_costs)
        reports = detect_word_errors(
            alignment,
            entry.canonical.word_spans,
            canonical_ids=entry.canonical.phoneme_ids(),
            rec=rec,
        )
        gold = gold_word_flags(entry.error_vector, entry.canonical.word_spans)
        predicted = predicted_word_flags(reports)
        edits = {
            "substitutions": sum(1 for op in alignment.ops if op.kind == "substitution"),
            "deletions": sum(1 for op in alignment.ops if op.kind == "deletion"),
            "insertions": sum(1 for op in alignment.ops if op.kind == "insertion"),
            "canonical_length": len(entry.canonical.phoneme_ids()),
        }
        row = {
            "sentence_id": entry.sentence_id,
            "gold_flags": [bool(g) for g in gold],
            "predicted_flags": [bool(p) for p in predicted],
            "edit_counts": edits,
            "words": [r.to_dict(inv) for r in reports],
        }
        return row

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = [r for r in pool.map(process, manifest.entries) if r is not None]
    else:
        rows = [r for r in map(process, manifest.entries) if r is not None]

    gold_all: list[bool] = []
    pred_all: list[bool] = []
    totals = {"substitutions": 0, "deletions": 0, "insertions": 0, "canonical_length": 0}
    with open(report_path, "w", encoding="utf-8") as fh:
        for row in rows:
            gold_all.extend(row["gold_flags"])
            pred_all.extend(row["predicted_flags"])
            for k in totals:
                totals[k] += row["edit_counts"][k]
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    metrics = compute_metrics(gold_all, pred_all, alignment_counts=totals)
    click.echo(
        f"utterances: {len(rows)}  words: {len(gold_all)}  "
        f"precision: {metrics['precision']:.4f}  recall: {metrics['recall']:.4f}  "
        f"F1: {metrics['f1']:.4f}  PER: {metrics['per']:.4f}"
    )


@main.command()
@click.option("--expected", required=True, help="Expected phoneme (IPA).")
@click.option("--produced", default=None, help="Produced phoneme (IPA); omit for a deletion.")
@click.option("--svg", "svg_path", default=None, type=click.Path(),
              help="Also write the expected phoneme's diagram here.")
@click.option("--locale", type=click.Choice(["en", "hi"]), default="en", show_default=True)
@_guard
def feedback(expected, produced, svg_path, locale):
    """Print contrastive articulatory feedback for a phoneme confusion."""
    from .feedback import compose_feedback, load_knowledge_base, render_tongue_diagram
    from .inventory import load_inventory

    inv = load_inventory()
    kb = load_knowledge_base(inventory=inv, locale=locale)
    exp = inv.by_ipa(expected)
    prod = inv.by_ipa(produced).id if produced else None
    message = compose_feedback(exp.id, prod, kb)
    click.echo(json.dumps(message.to_dict(inv), ensure_ascii=False, indent=2))
    if svg_path:
        Path(svg_path).write_text(render_tongue_diagram(kb.get(exp.id)), encoding="utf-8")
        click.echo(f"diagram written to {svg_path}", err=True)


@main.command("eval-metrics")
@click.option("--report", "report_path", required=True, type=click.Path(exists=True),
              help="Detection report JSONL produced by `detect`.")
@_guard
def eval_metrics(report_path):
    """Recompute aggregate metrics from a detection report."""
    from .stats import compute_metrics

    gold: list[bool] = []
    pred: list[bool] = []
    totals = {"substitutions": 0, "deletions": 0, "insertions": 0, "canonical_length": 0}
    for line in Path(report_path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        gold.extend(row["gold_flags"])
        pred.extend(row["predicted_flags"])
        for k in totals:
            totals[k] += row.get("edit_counts", {}).get(k, 0)
    if not gold:
        raise _fail_input(f"{report_path} has no rows")
    metrics = compute_metrics(gold, pred, alignment_counts=totals)
    click.echo(json.dumps(metrics, indent=2))


@main.command("eval-wilcoxon")
@click.option("--csv", "csv_path", required=True, type=click.Path(exists=True),
              help="Survey CSV: participant_id,phoneme,pre,post.")
@click.option("--alternative", type=click.Choice(["two_sided", "greater"]),
              default="two_sided", show_default=True)
@_guard
def eval_wilcoxon(csv_path, alternative):
    """Wilcoxon signed-rank analysis of pre/post self-ratings."""
    from .stats import read_survey_csv, summarize_likert, wilcoxon_pratt

    samples = read_survey_csv(csv_path)
    if not samples:
        raise _fail_input(f"{csv_path} has no samples")
    result = wilcoxon_pratt(samples, alternative)
    out = {
        "n": len(samples),
        "wilcoxon": result.to_dict(),
        "likert": summarize_likert(samples),
    }
    click.echo(json.dumps(out, ensure_ascii=False, indent=2))
    if result.degenerate:
        click.echo("note: all differences are zero (degenerate sample)", err=True)


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path(exists=True),
              help="JSON config file; environment variables override it.")
@click.option("--port", type=int, default=None, help="Override the configured port.")
@click.option("--host", default="127.0.0.1", show_default=True)
@_guard
def serve(config_path, port, host):
    """Run the practice HTTP service."""
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig.from_file(config_path) if config_path else ServiceConfig.from_env()
    if port is not None:
        config.port = port
    uvicorn.run(create_app(config), host=host, port=config.port, log_level="info")


if __name__ == "__main__":
    sys.exit(main())
