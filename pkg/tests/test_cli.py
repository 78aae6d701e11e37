import io

import numpy as np
import pytest

from selmask.cli import main
from selmask.config import load_config
from selmask.scorer import ScoreModel


@pytest.fixture
def config(tmp_path, paths):
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[paths]\n"
        f"corpus = {paths['toy_corpus']}\n"
        f"embeddings = {paths['toy_embeddings']}\n"
        f"vocab = {paths['toy_vocab']}\n"
        f"seeds_lo = {paths['seeds_lo']}\n"
        f"seeds_hi = {paths['seeds_hi']}\n"
        "model = model.bin\n"
        "output_dir = out\n"
    )
    return cfg


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def kv(text):
    return dict(line.split(" = ", 1) for line in text.splitlines() if " = " in line)


def test_train_scorer(config, capsys, tmp_path):
    code, out, _ = run(["train-scorer", "--config", config], capsys)
    assert code == 0
    assert float(kv(out)["train_accuracy"]) == 1.0
    first = (tmp_path / "model.bin").read_bytes()
    assert run(["train-scorer", "--config", config], capsys)[0] == 0
    assert (tmp_path / "model.bin").read_bytes() == first


def test_train_missing_embeddings(config, capsys, tmp_path):
    code, _, err = run(["train-scorer", "--config", config, "--embeddings", tmp_path / "nope.txt"], capsys)
    assert code == 2
    assert "nope.txt" in err


def test_train_bad_embeddings_is_data_error(config, capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 3\na 1 0\n")
    code, _, err = run(["train-scorer", "--config", config, "--embeddings", bad], capsys)
    assert code == 3 and "line 2" in err


def test_env_var_config(config, capsys, monkeypatch):
    monkeypatch.setenv("SELMASK_CONFIG", str(config))
    assert run(["train-scorer"], capsys)[0] == 0


def test_score(config, capsys, monkeypatch, tmp_path):
    run(["train-scorer", "--config", config], capsys)
    monkeypatch.setattr("sys.stdin", io.StringIO("qwertyuiop\nWonderful\nterrible\n"))
    code, out, _ = run(["score", "--config", config], capsys)
    assert code == 0
    lines = [line.split("\t") for line in out.splitlines()]
    assert lines[0] == ["qwertyuiop", "5.0"]
    assert float(lines[1][1]) > 5 > float(lines[2][1])


def test_score_hyperplane_word(tmp_path, capsys, monkeypatch):
    emb = tmp_path / "e.txt"
    emb.write_text("2 2\nflat 0 4\nright 2 0\n")
    ScoreModel(np.array([1.0, 0.0]), 0.0, 1.0).save(tmp_path / "m.bin")
    monkeypatch.setattr("sys.stdin", io.StringIO("flat\nright\n"))
    code, out, _ = run(["score", "--model", tmp_path / "m.bin", "--embeddings", emb], capsys)
    assert out.splitlines() == ["flat\t5.0", "right\t7.0"]


def test_calibrate_scores_file(tmp_path, capsys):
    scores = tmp_path / "s.txt"
    scores.write_text("\n".join(repr(x) for x in np.linspace(0, 10, 100_001).tolist()) + "\n")
    code, out, _ = run(["calibrate", "--scores-file", scores, "--family", "step"], capsys)
    assert code == 0
    assert float(kv(out)["alpha"]) == pytest.approx(0.75, abs=0.01)
    code, out, _ = run(["calibrate", "--scores-file", scores, "--family", "linear", "--alpha", "5"], capsys)
    assert float(kv(out)["beta"]) == pytest.approx(16.67, abs=0.23)


def test_calibrate_unreachable(tmp_path, capsys):
    scores = tmp_path / "s.txt"
    scores.write_text("5\n" * 50)
    code, _, err = run(["calibrate", "--scores-file", scores, "--family", "linear"], capsys)
    assert code == 4 and "unreachable target rate" in err


def test_calibrate_corpus_updates_config(config, capsys):
    run(["train-scorer", "--config", config], capsys)
    code, out, _ = run(["calibrate", "--config", config, "--family", "exponential", "--sample-size", "5000"],
                       capsys)
    assert code == 0
    assert kv(out)["sample_size"] == "5000"
    cfg = load_config(config)
    assert cfg.calibrated and cfg.family == "exponential" and cfg.gamma > 0
    code, out, _ = run(["calibrate", "--config", config, "--sample-size", str(10**8)], capsys)
    assert 0 < int(kv(out)["sample_size"]) < 10**8


def test_mask_and_stats(config, capsys, tmp_path):
    run(["train-scorer", "--config", config], capsys)
    code, out, _ = run(["mask", "--config", config], capsys)
    assert code == 0
    report = kv(out)
    assert abs(float(report["realized_mask_rate"]) - 0.15) <= 0.01
    out_dir = tmp_path / "out"
    assert (out_dir / "examples.jsonl").exists()
    assert (out_dir / "run_report.txt").exists()
    resolved = out_dir / "resolved_config.ini"
    assert load_config(resolved).calibrated
    code, out, _ = run(["stats", out_dir / "examples.jsonl", "--config", config], capsys)
    st = kv(out)
    assert st["whole_word_violations"] == "0"
    assert st["realized_mask_rate"] == report["realized_mask_rate"]
    # re-running from the saved config reproduces the bytes
    first = (out_dir / "examples.jsonl").read_bytes()
    run(["mask", "--config", resolved, "--output-dir", tmp_path / "again"], capsys)
    assert (tmp_path / "again" / "examples.jsonl").read_bytes() == first


def test_mask_random_tm_stats(config, capsys, tmp_path):
    code, _, _ = run(["mask", "--config", config, "--strategy", "random_tm", "--output-dir", tmp_path / "tm"],
                     capsys)
    assert code == 0
    code, out, _ = run(["stats", tmp_path / "tm" / "examples.jsonl", "--config", config], capsys)
    st = kv(out)
    assert abs(float(st["realized_mask_rate"]) - 0.15) <= 0.01
    assert int(st["whole_word_violations"]) > 0


def test_mask_missing_model(config, capsys):
    code, _, err = run(["mask", "--config", config], capsys)
    assert code == 2 and "model" in err


def test_bad_config_value(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[scorer]\nepochs = many\n")
    code, _, err = run(["train-scorer", "--config", cfg], capsys)
    assert code == 2 and "epochs" in err
