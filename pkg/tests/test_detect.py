import numpy as np
import pytest

from conftest import sentence_bank
from hindicapt.align import align, substitution_cost_matrix
from hindicapt.corpus import build_corpus, inject_errors, nonadjacent
from hindicapt.detect import (
    RecognizerOutput,
    alignment_to_error_ops,
    detect_word_errors,
    gold_word_flags,
    mock_recognize,
    predicted_word_flags,
    read_recognizer_outputs,
    severity_bin,
    write_recognizer_outputs,
)
from hindicapt.errors import InconsistentInput, MalformedEntry
from hindicapt.g2p import to_phonemes
from hindicapt.inventory import N_TOKENS, encode
from hindicapt.rng import derive_seed


@pytest.fixture(scope="module")
def sub_costs(inventory):
    return substitution_cost_matrix(inventory)


@pytest.fixture(scope="module")
def small_corpus(inventory):
    return build_corpus(sentence_bank(40), n_pairs=120, p=0.05, seed=77, inventory=inventory)


def uniform_rec(seq, mass=0.9):
    ids = seq.phoneme_ids()
    posteriors = np.zeros((len(ids), N_TOKENS))
    for row, token in enumerate(ids):
        posteriors[row, :] = (1.0 - mass) / (N_TOKENS - 1)
        posteriors[row, token] = mass
    return RecognizerOutput(phonemes=seq, posteriors=posteriors)


def test_recognizer_output_validation(inventory):
    seq = encode([["k", "ə"]], inventory)
    good = uniform_rec(seq)
    assert good.posteriors.shape == (2, 67)
    bad = np.full((2, 67), 1.0 / 67)
    with pytest.raises(MalformedEntry):
        RecognizerOutput(phonemes=seq, posteriors=bad * 1.5)
    # argmax must be the emitted token
    wrong = np.zeros((2, 67))
    wrong[:, 5] = 1.0
    with pytest.raises(MalformedEntry):
        RecognizerOutput(phonemes=seq, posteriors=wrong)


def test_all_match_alignment_flags_nothing(inventory, sub_costs):
    seq = to_phonemes("कमल बड़ा है।", inventory).sequence
    alignment = align(seq, seq, inventory, sub_costs=sub_costs)
    reports = detect_word_errors(alignment, seq.word_spans,
                                 canonical_ids=seq.phoneme_ids(),
                                 predicted_ids=seq.phoneme_ids())
    assert all(not r.mispronounced for r in reports)
    assert all(r.severity == 0.0 and r.severity_bin == "none" for r in reports)
    assert len(reports) == 3


def test_single_deletion_flags_only_its_word(inventory, sub_costs):
    canonical = encode([["k", "ə"], ["m", "ə", "l"], ["d̪", "aː"]], inventory)
    predicted = encode([["k", "ə"], ["m", "l"], ["d̪", "aː"]], inventory)
    alignment = align(canonical, predicted, inventory, sub_costs=sub_costs)
    reports = detect_word_errors(alignment, canonical.word_spans,
                                 canonical_ids=canonical.phoneme_ids(),
                                 predicted_ids=predicted.phoneme_ids())
    assert [r.mispronounced for r in reports] == [False, True, False]
    assert reports[1].severity == pytest.approx(1.0)
    assert reports[1].severity_bin == "severe"


def test_substitution_severity_from_posterior(inventory, sub_costs):
    canonical = encode([["t̪", "aː"]], inventory)
    predicted = encode([["ʈ", "aː"]], inventory)
    rec = uniform_rec(predicted, mass=0.9)
    # posterior of the canonical phoneme under the predicted row
    canonical_token = canonical.phoneme_ids()[0]
    rec.posteriors[0, :] = (1.0 - 0.9 - 0.09) / 65
    rec.posteriors[0, predicted.phoneme_ids()[0]] = 0.9
    rec.posteriors[0, canonical_token] = 0.09
    alignment = align(canonical, predicted, inventory, sub_costs=sub_costs)
    reports = detect_word_errors(alignment, canonical.word_spans,
                                 canonical_ids=canonical.phoneme_ids(), rec=rec)
    assert reports[0].severity == pytest.approx(1.0 - 0.09)

    # spec-style arithmetic: posterior 0.9 on the canonical -> severity 0.1, minor
    rec2 = uniform_rec(predicted, mass=0.9)
    rec2.posteriors[0, :] = 0.0
    rec2.posteriors[0, canonical_token] = 0.09
    rec2.posteriors[0, predicted.phoneme_ids()[0]] = 0.91
    rec2.posteriors[0] /= rec2.posteriors[0].sum()
    assert severity_bin(0.1) == "minor"
    assert severity_bin(0.5) == "moderate"
    assert severity_bin(0.8) == "severe"


def test_severity_monotone_in_posterior(inventory, sub_costs):
    canonical = encode([["t̪", "aː"]], inventory)
    predicted = encode([["ʈ", "aː"]], inventory)
    alignment = align(canonical, predicted, inventory, sub_costs=sub_costs)
    canonical_token = canonical.phoneme_ids()[0]
    produced_token = predicted.phoneme_ids()[0]
    last = -1.0
    for mass_on_canonical in (0.2, 0.1, 0.05, 0.01):
        rec = uniform_rec(predicted, mass=0.75)
        rec.posteriors[0, :] = (1 - 0.75 - mass_on_canonical) / 65
        rec.posteriors[0, produced_token] = 0.75
        rec.posteriors[0, canonical_token] = mass_on_canonical
        reports = detect_word_errors(alignment, canonical.word_spans,
                                     canonical_ids=canonical.phoneme_ids(), rec=rec)
        assert reports[0].severity >= last
        last = reports[0].severity


def test_insertion_attributed_to_left_word(inventory, sub_costs):
    canonical = encode([["k", "aː"], ["m", "iː"]], inventory)
    predicted = encode([["k", "aː", "s"], ["m", "iː"]], inventory)
    alignment = align(canonical, predicted, inventory, sub_costs=sub_costs)
    reports = detect_word_errors(alignment, canonical.word_spans,
                                 canonical_ids=canonical.phoneme_ids(),
                                 predicted_ids=predicted.phoneme_ids())
    assert [r.mispronounced for r in reports] == [True, False]


def test_word_span_validation(inventory, sub_costs):
    canonical = encode([["k", "aː"]], inventory)
    alignment = align(canonical, canonical, inventory, sub_costs=sub_costs)
    with pytest.raises(InconsistentInput):
        detect_word_errors(alignment, ((0, 1), (2, 3)),
                           canonical_ids=canonical.phoneme_ids(),
                           predicted_ids=canonical.phoneme_ids())


def test_mock_full_fidelity_echoes_corrupted(inventory, small_corpus):
    for entry in small_corpus.entries[:30]:
        rec = mock_recognize(entry, 1.0, seed=entry.seed, inventory=inventory)
        assert rec.phonemes.tokens == entry.corrupted.tokens
        sums = rec.posteriors.sum(axis=1)
        assert np.max(np.abs(sums - 1.0)) < 1e-6
        emitted = rec.posteriors[np.arange(len(rec.phonemes.phoneme_ids())),
                                 list(rec.phonemes.phoneme_ids())]
        assert np.all(emitted >= 0.75) and np.all(emitted <= 0.99)


def test_mock_determinism(inventory, small_corpus):
    entry = small_corpus.entries[0]
    a = mock_recognize(entry, 0.8, seed=5, inventory=inventory)
    b = mock_recognize(entry, 0.8, seed=5, inventory=inventory)
    assert a.phonemes.tokens == b.phonemes.tokens
    assert np.array_equal(a.posteriors, b.posteriors)
    c = mock_recognize(entry, 0.8, seed=6, inventory=inventory)
    assert a.phonemes.tokens != c.phonemes.tokens or not np.array_equal(a.posteriors, c.posteriors)


def test_zero_fidelity_raises_false_positive_rate(inventory, sub_costs, small_corpus):
    def fp_rate(fidelity):
        fp = words = 0
        for entry in small_corpus.entries:
            rec = mock_recognize(entry, fidelity, seed=derive_seed(1, entry.sentence_id),
                                 inventory=inventory)
            alignment = align(entry.canonical, rec.phonemes, inventory, sub_costs=sub_costs)
            reports = detect_word_errors(alignment, entry.canonical.word_spans,
                                         canonical_ids=entry.canonical.phoneme_ids(), rec=rec)
            gold = gold_word_flags(entry.error_vector, entry.canonical.word_spans)
            for g, r in zip(gold, reports):
                if not g:
                    words += 1
                    if r.mispronounced:
                        fp += 1
        return fp / words

    assert fp_rate(0.0) > fp_rate(1.0)


def test_sparse_recovery(inventory, sub_costs, small_corpus):
    checked = 0
    for entry in small_corpus.entries:
        if entry.ops and not nonadjacent(entry.ops):
            continue
        alignment = align(entry.canonical, entry.corrupted, inventory, sub_costs=sub_costs)
        recovered = alignment_to_error_ops(alignment, entry.corrupted)
        assert recovered == sorted(entry.ops, key=lambda o: (o.canonical_index, o.kind)), (
            entry.sentence_id
        )
        checked += 1
    assert checked >= 90


def test_gold_flags_length_check(inventory):
    from hindicapt.corpus import ErrorVector

    with pytest.raises(InconsistentInput):
        gold_word_flags(ErrorVector((0, 1)), ((0, 3),))


def test_http_recognize_against_stub_server(inventory, small_corpus):
    import http.server
    import json
    import threading

    from hindicapt.detect import http_recognize
    from hindicapt.errors import CaptError

    entry = small_corpus.entries[0]
    rec = mock_recognize(entry, 1.0, seed=2, inventory=inventory)
    payload = json.dumps({
        "tokens": list(rec.phonemes.tokens),
        "posteriors": [[round(float(v), 4) for v in row] for row in rec.posteriors],
    }).encode()

    class Handler(http.server.BaseHTTPRequestHandler):
        def do_POST(self):
            self.rfile.read(int(self.headers.get("content-length", 0)))
            self.send_response(200)
            self.send_header("content-type", "application/json")
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, *args):
            pass

    server = http.server.HTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        url = f"http://127.0.0.1:{server.server_port}/recognize"
        out = http_recognize(url, b"RIFFfake")
        assert out.phonemes.tokens == rec.phonemes.tokens
        assert np.max(np.abs(out.posteriors.sum(axis=1) - 1.0)) < 1e-9
    finally:
        server.shutdown()

    with pytest.raises(CaptError):
        http_recognize("http://127.0.0.1:1/nothing-here", b"x", timeout=0.5)


def test_recognizer_file_round_trip(inventory, small_corpus, tmp_path):
    outputs = {}
    for entry in small_corpus.entries[:5]:
        outputs[entry.sentence_id] = mock_recognize(entry, 1.0, seed=3, inventory=inventory)
    path = tmp_path / "rec.jsonl"
    write_recognizer_outputs(outputs, path)
    loaded = read_recognizer_outputs(path)
    assert set(loaded) == set(outputs)
    for sid, rec in outputs.items():
        assert loaded[sid].phonemes.tokens == rec.phonemes.tokens
        # 4-decimal rows renormalize to a valid distribution; renormalization
        # can move the big emitted-token mass by a few thousandths
        sums = loaded[sid].posteriors.sum(axis=1)
        assert np.max(np.abs(sums - 1.0)) < 1e-9
        assert np.max(np.abs(loaded[sid].posteriors - rec.posteriors)) < 5e-3
