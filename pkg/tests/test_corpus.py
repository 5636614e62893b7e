import json
import math
from pathlib import Path

import pytest

from conftest import sentence_bank
from hindicapt.audio import AugmentSpec, read_wav
from hindicapt.corpus import (
    ErrorOp,
    SineTtsStub,
    augment_corpus,
    build_corpus,
    inject_errors,
    nonadjacent,
    read_manifest,
    replay_ops,
    write_manifest,
)
from hindicapt.errors import CaptError, InvalidProbability
from hindicapt.g2p import to_phonemes
from hindicapt.inventory import EOS, EOW, encode

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="module")
def canonical(inventory):
    return to_phonemes("लड़का सड़क पर दौड़ता है।", inventory).sequence


def test_zero_probability_is_identity(inventory, canonical):
    corrupted, ops, ev = inject_errors(canonical, 0.0, 7, inventory)
    assert corrupted.tokens == canonical.tokens
    assert ops == []
    assert not any(ev.bits)


def test_probability_range_enforced(inventory, canonical):
    with pytest.raises(InvalidProbability):
        inject_errors(canonical, 0.9, 1, inventory)
    with pytest.raises(InvalidProbability):
        inject_errors(canonical, -0.1, 1, inventory)


def test_markers_never_perturbed(inventory, canonical):
    for seed in range(50):
        corrupted, _, _ = inject_errors(canonical, 0.5, seed, inventory)
        assert corrupted.tokens[-1] == EOS
        assert corrupted.tokens.count(EOS) == 1
        # every word non-empty: no adjacent EOW possible by construction
        assert all(w for w in corrupted.words())


def test_error_vector_matches_ops(inventory, canonical):
    for seed in range(200):
        _, ops, ev = inject_errors(canonical, 0.3, seed, inventory)
        marked = {max(op.canonical_index, 0) for op in ops}
        assert {i for i, b in enumerate(ev.bits) if b} == marked
        assert len(ev.bits) == len(canonical.phoneme_ids())


def test_replay_reproduces_corrupted(inventory, canonical):
    for seed in range(300):
        corrupted, ops, _ = inject_errors(canonical, 0.4, seed, inventory)
        assert replay_ops(canonical, ops).tokens == corrupted.tokens


def test_substitution_always_changes_token(inventory, canonical):
    ids = canonical.phoneme_ids()
    for seed in range(100):
        _, ops, _ = inject_errors(canonical, 0.5, seed, inventory)
        for op in ops:
            if op.kind == "substitution":
                assert op.inserted_or_replacement != ids[op.canonical_index]


def test_injection_rate_concentration(inventory, canonical):
    n_positions = 0
    n_marked = 0
    for seed in range(1500):
        _, _, ev = inject_errors(canonical, 0.05, seed, inventory)
        n_positions += len(ev.bits)
        n_marked += sum(ev.bits)
    rate = n_marked / n_positions
    band = 4 * math.sqrt(0.05 * 0.95 / n_positions)
    assert abs(rate - 0.05) < band, (rate, band)


def test_golden_ops_seed_42(inventory):
    fixture = json.loads((FIXTURES / "injection_seed42.json").read_text("utf-8"))
    seq = encode(fixture["words"], inventory)
    corrupted, ops, ev = inject_errors(seq, fixture["p"], fixture["seed"], inventory)
    assert [op.to_dict() for op in ops] == fixture["ops"]
    assert list(ev.bits) == fixture["error_vector"]
    assert list(corrupted.tokens) == fixture["corrupted_tokens"]


def test_uniform_policy(inventory, canonical):
    corrupted, ops, _ = inject_errors(
        canonical, 0.5, 3, inventory, confusion_policy="uniform"
    )
    assert replay_ops(canonical, ops).tokens == corrupted.tokens
    with pytest.raises(ValueError):
        inject_errors(canonical, 0.1, 3, inventory, confusion_policy="bogus")


def test_nonadjacent_predicate():
    mk = lambda *idx: [ErrorOp("deletion", i) for i in idx]
    assert nonadjacent(mk(0, 5, 10))
    assert nonadjacent(mk(3))
    assert nonadjacent([])
    assert not nonadjacent(mk(0, 2))
    assert not nonadjacent(mk(4, 6, 20))


def test_build_corpus_shape(inventory):
    manifest = build_corpus(sentence_bank(30), n_pairs=60, p=0.05, seed=5, inventory=inventory)
    assert manifest.metadata["n_pairs"] == 60
    assert manifest.metadata["sample_rate"] == 8000
    assert len(manifest.entries) == 60
    assert len({e.sentence_id for e in manifest.entries}) == 60
    speakers = {e.speaker_id for e in manifest.entries}
    assert speakers == {0, 1}  # 60 pairs over 30 sentences cycle two speakers


def test_build_corpus_speaker_coverage(inventory):
    manifest = build_corpus(sentence_bank(10), n_pairs=100, p=0.0, seed=5, inventory=inventory)
    assert {e.speaker_id for e in manifest.entries} == set(range(10))


def test_single_pair_no_errors(inventory):
    manifest = build_corpus(sentence_bank(5), n_pairs=1, p=0.0, seed=1, inventory=inventory)
    entry = manifest.entries[0]
    assert entry.corrupted.tokens == entry.canonical.tokens
    assert entry.ops == [] and not any(entry.error_vector.bits)


def test_build_corpus_too_many_pairs(inventory):
    with pytest.raises(CaptError):
        build_corpus(sentence_bank(3), n_pairs=31, p=0.0, seed=1, inventory=inventory)


def test_build_corpus_skips_bad_sentences(inventory):
    sentences = ["abc latin", "कमल बड़ा है।", "घर दूर है।"]
    manifest = build_corpus(sentences, n_pairs=2, p=0.0, seed=1, inventory=inventory)
    texts = {e.text for e in manifest.entries}
    assert "abc latin" not in texts and len(manifest.entries) == 2


def test_manifest_deterministic_and_round_trips(inventory, tmp_path):
    sentences = sentence_bank(20)
    m1 = build_corpus(sentences, n_pairs=40, p=0.05, seed=11, inventory=inventory)
    m2 = build_corpus(sentences, n_pairs=40, p=0.05, seed=11, inventory=inventory)
    p1, p2 = tmp_path / "m1.jsonl", tmp_path / "m2.jsonl"
    write_manifest(m1, p1)
    write_manifest(m2, p2)
    assert p1.read_bytes() == p2.read_bytes()

    loaded = read_manifest(p1)
    assert loaded.metadata == m1.metadata
    for a, b in zip(loaded.entries, m1.entries):
        assert a.to_dict() == b.to_dict()

    m3 = build_corpus(sentences, n_pairs=40, p=0.05, seed=12, inventory=inventory)
    p3 = tmp_path / "m3.jsonl"
    write_manifest(m3, p3)
    assert p1.read_bytes() != p3.read_bytes()


def test_empty_manifest_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    with pytest.raises(CaptError):
        read_manifest(path)


def test_tts_stub_pipeline(inventory, tmp_path):
    tts = SineTtsStub(inventory)
    manifest = build_corpus(
        sentence_bank(4), n_pairs=4, p=0.1, seed=2, inventory=inventory,
        tts=tts, out_dir=tmp_path,
    )
    for entry in manifest.entries:
        assert entry.audio_paths is not None
        for rel in entry.audio_paths.values():
            buf = read_wav(tmp_path / rel)
            assert buf.sample_rate == 8000
            assert 0.5 <= buf.duration_seconds <= 8.0
    # same phonemes + speaker -> identical stub audio
    a = tts.synthesize(3, phonemes=["k", "ə"])
    b = tts.synthesize(3, phonemes=["k", "ə"])
    assert (a.samples == b.samples).all()
    c = tts.synthesize(4, phonemes=["k", "ə"])
    assert not (a.samples == c.samples).all()


def test_augment_empty_specs(inventory, tmp_path):
    manifest = build_corpus(sentence_bank(4), n_pairs=4, p=0.0, seed=2, inventory=inventory)
    grown, skipped = augment_corpus(manifest, [], seed=1, manifest_dir=tmp_path)
    assert len(grown.entries) == 4
    assert skipped == []


def test_augment_cardinality_and_vectors(inventory, tmp_path):
    tts = SineTtsStub(inventory)
    manifest = build_corpus(
        sentence_bank(6), n_pairs=6, p=0.2, seed=3, inventory=inventory,
        tts=tts, out_dir=tmp_path,
    )
    grown, skipped = augment_corpus(manifest, [AugmentSpec()], seed=9, manifest_dir=tmp_path)
    assert len(grown.entries) == 12 and not skipped
    audio_rows = [e for e in grown.entries if e.audio_paths]
    assert len(audio_rows) == 12
    for variant in grown.entries[6:]:
        source = next(e for e in manifest.entries if e.sentence_id == variant.augment["source"])
        assert variant.error_vector == source.error_vector
        assert variant.ops == source.ops
        assert -5.0 <= variant.augment["gain_db"] <= 5.0
        assert 0.9 <= variant.augment["speed_factor"] <= 1.1
        for rel in variant.audio_paths.values():
            assert (tmp_path / rel).exists()


def test_augment_skips_entries_without_audio(inventory, tmp_path):
    manifest = build_corpus(sentence_bank(3), n_pairs=3, p=0.0, seed=4, inventory=inventory)
    grown, skipped = augment_corpus(manifest, [AugmentSpec()], seed=1, manifest_dir=tmp_path)
    assert len(skipped) == 3
    assert len(grown.entries) == 3


def test_augment_gain_distribution(inventory, tmp_path):
    # gains must be uniform over [-5, 5]; verify the real augmenter draws
    # match the seeded stream, then check the empirical mean at 10k draws
    tts = SineTtsStub(inventory, phoneme_seconds=0.2)
    manifest = build_corpus(
        sentence_bank(1), n_pairs=1, p=0.0, seed=3, inventory=inventory,
        tts=tts, out_dir=tmp_path,
    )
    grown, _ = augment_corpus(manifest, [AugmentSpec()] * 20, seed=9, manifest_dir=tmp_path)

    from hindicapt.rng import SplitMix64, derive_seed

    def drawn(v):
        rng = SplitMix64(derive_seed(9, "s00000", v))
        return rng.uniform(-5.0, 5.0)

    for v, variant in enumerate(grown.entries[1:]):
        assert variant.augment["gain_db"] == pytest.approx(drawn(v))

    gains = [drawn(v) for v in range(10000)]
    mean = sum(gains) / len(gains)
    assert abs(mean) < 0.2
