"""Secondary acceptance: a 10-pair toy file through a real (tiny) generative
scorer, validated end to end through the judgekit CLI."""

from __future__ import annotations

import subprocess
import sys

from conftest import criterion, toy_pairs
from scorer_bridge.cli import main
from scorer_bridge.pairs import write_pairs


def _judgekit(*args: str) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "judgekit", *args], capture_output=True, text=True, check=False
    )


def test_scorer_bridge_acceptance(tmp_path, seq2seq_model_dir):
    with criterion("scorer bridge: 10 toy pairs round-trip; direct == threshold@0.5"):
        pairs_path = tmp_path / "pairs.tsv"
        pairs_path.write_text(write_pairs(toy_pairs(10)), encoding="utf-8")
        scores_path = tmp_path / "scores.tsv"

        code = main(["score", "--model", seq2seq_model_dir, "--kind", "generative_token",
                     "--pairs", str(pairs_path), "--out", str(scores_path), "--batch", "4"])
        assert code == 0

        lines = scores_path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 10
        probs = []
        for line in lines:
            topic, doc, score, token, prob = line.split("\t")
            assert token in ("true", "false")
            assert 0.0 <= float(prob) <= 1.0
            assert float(score) == float(prob)
            probs.append(float(prob))
        assert all(prob != 0.5 for prob in probs)  # ties the two adaptations together below

        # round-trip through the judging toolkit's external interface
        direct_out = tmp_path / "direct.qrels"
        threshold_out = tmp_path / "threshold.qrels"
        direct = _judgekit("judge", "--scores", str(scores_path), "--strategy", "direct",
                           "--out", str(direct_out))
        assert direct.returncode == 0, direct.stderr
        threshold = _judgekit("judge", "--scores", str(scores_path), "--strategy", "threshold",
                              "--theta", "0.5", "--out", str(threshold_out))
        assert threshold.returncode == 0, threshold.stderr
        assert direct_out.read_bytes() == threshold_out.read_bytes()
        assert len(direct_out.read_text().splitlines()) == 10


def test_empty_pairs_file(tmp_path, seq2seq_model_dir):
    pairs_path = tmp_path / "empty.tsv"
    pairs_path.write_text("", encoding="utf-8")
    out_path = tmp_path / "scores.tsv"
    code = main(["score", "--model", seq2seq_model_dir, "--kind", "generative_token",
                 "--pairs", str(pairs_path), "--out", str(out_path)])
    assert code == 0
    assert out_path.read_text(encoding="utf-8") == ""


def test_duplicate_pair_fails_before_scoring(tmp_path):
    pairs_path = tmp_path / "dup.tsv"
    pairs_path.write_text("q1\td1\tcat\tdog\nq1\td1\tcat\tdog\n", encoding="utf-8")
    out_path = tmp_path / "scores.tsv"
    # a bogus model ref proves the pairs file is validated before any model work
    code = main(["score", "--model", str(tmp_path / "missing-model"), "--kind", "generative_token",
                 "--pairs", str(pairs_path), "--out", str(out_path)])
    assert code == 1
    assert not out_path.exists()


def test_cli_rerun_is_byte_identical(tmp_path, seq2seq_model_dir):
    pairs_path = tmp_path / "pairs.tsv"
    pairs_path.write_text(write_pairs(toy_pairs(6)), encoding="utf-8")
    out_path = tmp_path / "scores.tsv"
    argv = ["score", "--model", seq2seq_model_dir, "--kind", "generative_token",
            "--pairs", str(pairs_path), "--out", str(out_path), "--batch", "2"]
    assert main(argv) == 0
    first = out_path.read_bytes()
    assert main(argv) == 0
    assert out_path.read_bytes() == first


def test_usage_errors(tmp_path):
    assert main([]) == 2
    assert main(["score", "--model", "x"]) == 2
    assert main(["score", "--model", "x", "--kind", "bogus", "--pairs", "p", "--out", "o"]) == 2
