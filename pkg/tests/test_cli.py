import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from conftest import sentence_bank
from hindicapt.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


def write_sentences(tmp_path, n=20) -> Path:
    path = tmp_path / "sentences.txt"
    path.write_text("\n".join(sentence_bank(n)) + "\n", encoding="utf-8")
    return path


class TestG2p:
    def test_single_vowel(self, runner):
        result = invoke(runner, "g2p", "--text", "अ")
        assert result.exit_code == 0
        assert result.output.strip() == "ə"

    def test_golden_word(self, runner):
        result = invoke(runner, "g2p", "--text", "कमल")
        assert result.output.strip() == "k ə m ə l"

    def test_word_boundary_marker(self, runner):
        result = invoke(runner, "g2p", "--text", "अब कमल")
        assert result.output.strip() == "ə b | k ə m ə l"

    def test_no_schwa_deletion_flag(self, runner):
        result = invoke(runner, "g2p", "--text", "कमल", "--no-schwa-deletion")
        assert result.output.strip() == "k ə m ə l ə"

    def test_latin_input_exits_1_with_offset(self, runner):
        result = runner.invoke(main, ["g2p", "--text", "abc"])
        assert result.exit_code == 1
        assert "byte offset 0" in result.output


class TestSynth:
    def test_deterministic_manifests(self, runner, tmp_path):
        sentences = write_sentences(tmp_path)
        out1, out2 = tmp_path / "c1", tmp_path / "c2"
        for out in (out1, out2):
            result = invoke(
                runner, "synth", "--sentences", str(sentences), "--pairs", "40",
                "--p", "0.05", "--seed", "7", "--out", str(out),
            )
            assert result.exit_code == 0, result.output
        assert (out1 / "manifest.jsonl").read_bytes() == (out2 / "manifest.jsonl").read_bytes()

    def test_metadata_n_pairs(self, runner, tmp_path):
        sentences = write_sentences(tmp_path, 25)
        out = tmp_path / "corpus"
        invoke(runner, "synth", "--sentences", str(sentences), "--pairs", "50",
               "--seed", "1", "--out", str(out))
        first = (out / "manifest.jsonl").read_text("utf-8").splitlines()[0]
        assert json.loads(first)["n_pairs"] == 50

    def test_invalid_probability_exits_1(self, runner, tmp_path):
        sentences = write_sentences(tmp_path)
        result = runner.invoke(main, [
            "synth", "--sentences", str(sentences), "--pairs", "5",
            "--p", "0.9", "--out", str(tmp_path / "x"),
        ])
        assert result.exit_code == 1

    def test_missing_file_exits_1(self, runner, tmp_path):
        result = runner.invoke(main, [
            "synth", "--sentences", str(tmp_path / "nope.txt"), "--pairs", "5",
            "--out", str(tmp_path / "x"),
        ])
        assert result.exit_code != 0

    def test_stub_audio(self, runner, tmp_path):
        sentences = write_sentences(tmp_path, 5)
        out = tmp_path / "with-audio"
        result = invoke(runner, "synth", "--sentences", str(sentences), "--pairs", "5",
                        "--seed", "2", "--tts-stub", "--out", str(out))
        assert result.exit_code == 0
        rows = [json.loads(l) for l in (out / "manifest.jsonl").read_text("utf-8").splitlines()[1:]]
        assert all(r["audio_paths"] for r in rows)
        assert (out / rows[0]["audio_paths"]["correct"]).exists()


class TestDetect:
    def test_perfect_fidelity_prints_f1_one(self, runner, tmp_path):
        sentences = write_sentences(tmp_path, 30)
        out = tmp_path / "corpus"
        invoke(runner, "synth", "--sentences", str(sentences), "--pairs", "60",
               "--p", "0.05", "--seed", "3", "--out", str(out))
        report = tmp_path / "report.jsonl"
        result = invoke(runner, "detect", "--manifest", str(out / "manifest.jsonl"),
                        "--fidelity", "1.0", "--report", str(report))
        assert result.exit_code == 0
        assert "F1: 1.0000" in result.output
        assert report.exists() and report.read_text("utf-8").strip()

    def test_empty_manifest_exits_1(self, runner, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text(
            json.dumps({"p_error": 0.05, "n_pairs": 0, "seed": 1,
                        "speaker_count": 10, "sample_rate": 8000}) + "\n",
            encoding="utf-8",
        )
        result = runner.invoke(main, [
            "detect", "--manifest", str(path), "--report", str(tmp_path / "r.jsonl"),
        ])
        assert result.exit_code == 1

    def test_recognizer_outputs_file(self, runner, tmp_path, inventory):
        from hindicapt.corpus import read_manifest
        from hindicapt.detect import mock_recognize, write_recognizer_outputs

        sentences = write_sentences(tmp_path, 10)
        out = tmp_path / "corpus"
        invoke(runner, "synth", "--sentences", str(sentences), "--pairs", "10",
               "--p", "0.05", "--seed", "3", "--out", str(out))
        manifest = read_manifest(out / "manifest.jsonl")
        recs = {e.sentence_id: mock_recognize(e, 1.0, seed=1, inventory=inventory)
                for e in manifest.entries}
        rec_path = tmp_path / "rec.jsonl"
        write_recognizer_outputs(recs, rec_path)
        result = invoke(runner, "detect", "--manifest", str(out / "manifest.jsonl"),
                        "--recognizer", str(rec_path),
                        "--report", str(tmp_path / "r.jsonl"))
        assert result.exit_code == 0
        assert "F1: 1.0000" in result.output

    def test_lower_fidelity_lowers_f1(self, runner, tmp_path):
        sentences = write_sentences(tmp_path, 30)
        out = tmp_path / "corpus"
        invoke(runner, "synth", "--sentences", str(sentences), "--pairs", "60",
               "--p", "0.05", "--seed", "3", "--out", str(out))
        noisy = invoke(runner, "detect", "--manifest", str(out / "manifest.jsonl"),
                       "--fidelity", "0.7", "--seed", "5",
                       "--report", str(tmp_path / "noisy.jsonl"))
        f1 = float(noisy.output.split("F1:")[1].split()[0])
        assert f1 < 1.0


class TestAugment:
    def test_augment_grows_manifest(self, runner, tmp_path):
        sentences = write_sentences(tmp_path, 5)
        out = tmp_path / "corpus"
        invoke(runner, "synth", "--sentences", str(sentences), "--pairs", "5",
               "--seed", "2", "--tts-stub", "--out", str(out))
        result = invoke(runner, "augment", "--manifest", str(out / "manifest.jsonl"),
                        "--variants", "1", "--seed", "4")
        assert result.exit_code == 0
        rows = (out / "manifest.augmented.jsonl").read_text("utf-8").splitlines()
        assert json.loads(rows[0])["n_pairs"] == 10


class TestEval:
    def test_eval_metrics_from_report(self, runner, tmp_path):
        report = tmp_path / "report.jsonl"
        rows = [
            {"sentence_id": "a", "gold_flags": [True, False],
             "predicted_flags": [True, False],
             "edit_counts": {"substitutions": 1, "deletions": 0, "insertions": 0,
                             "canonical_length": 10}},
            {"sentence_id": "b", "gold_flags": [False], "predicted_flags": [True],
             "edit_counts": {"substitutions": 0, "deletions": 1, "insertions": 0,
                             "canonical_length": 10}},
        ]
        report.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
        result = invoke(runner, "eval-metrics", "--report", str(report))
        metrics = json.loads(result.output)
        assert metrics["recall"] == 1.0
        assert metrics["precision"] == 0.5
        assert metrics["per"] == pytest.approx(0.1)

    def test_eval_wilcoxon(self, runner, tmp_path):
        csv = tmp_path / "survey.csv"
        lines = ["participant_id,phoneme,pre,post"]
        for i in range(5):
            lines.append(f"p{i},ʈ,2,3")
        csv.write_text("\n".join(lines) + "\n", encoding="utf-8")
        result = invoke(runner, "eval-wilcoxon", "--csv", str(csv))
        out = json.loads(result.output)
        assert out["wilcoxon"]["p_value"] == pytest.approx(0.0625)

    def test_eval_wilcoxon_degenerate(self, runner, tmp_path):
        csv = tmp_path / "flat.csv"
        csv.write_text(
            "participant_id,phoneme,pre,post\np0,ʈ,3,3\np1,ʈ,4,4\n", encoding="utf-8"
        )
        result = runner.invoke(main, ["eval-wilcoxon", "--csv", str(csv)])
        assert result.exit_code == 0
        assert json.loads(result.stdout)["wilcoxon"]["degenerate"] is True


class TestFeedbackCommand:
    def test_substitution_feedback(self, runner, tmp_path):
        svg = tmp_path / "t.svg"
        result = invoke(runner, "feedback", "--expected", "ʈ", "--produced", "t̪",
                        "--svg", str(svg))
        payload = json.loads(result.stdout)
        assert payload["expected"] == "ʈ"
        assert payload["contrast_points"][0]["feature"] == "place"
        assert svg.exists()

    def test_unknown_phoneme_exits_1(self, runner):
        result = runner.invoke(main, ["feedback", "--expected", "zz"])
        assert result.exit_code == 1
