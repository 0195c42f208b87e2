import json

import numpy as np
import pytest

from ptseq.cli import main
from ptseq.dataio import read_csv_sequence, write_feature_csv, write_wav
from ptseq.errors import FormatError
from ptseq.pipeline import PipelineConfig, load_bundle, pipeline_classify, pipeline_train, save_bundle


def write_symbols(path, symbols):
    path.write_text("sym\n" + "".join(f"{s}\n" for s in symbols), encoding="utf-8")


@pytest.fixture
def symbol_dataset(tmp_path):
    root = tmp_path / "data"
    rng = np.random.default_rng(0)
    # each class cycles through its own pair of symbols
    for label, base in (("up", 0), ("down", 2)):
        d = root / label
        d.mkdir(parents=True)
        for k in range(4):
            start = int(rng.integers(2))
            write_symbols(d / f"s{k}.csv", base + (start + np.arange(12)) % 2)
    return root


@pytest.fixture
def feature_dataset(tmp_path):
    root = tmp_path / "feat"
    rng = np.random.default_rng(1)
    centres = {"left": np.array([[0, 0], [4, 0], [4, 4], [0, 4]]), "right": np.array([[0, 0], [0, 4], [4, 4], [4, 0]])}
    for label, pts in centres.items():
        d = root / label
        d.mkdir(parents=True)
        for k in range(3):
            seq = np.vstack([pts[(k + np.arange(16)) % 4]]) + rng.normal(0, 0.1, size=(16, 2))
            write_feature_csv(d / f"f{k}.csv", seq)
    return root


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_train_and_classify_symbols(symbol_dataset, tmp_path, capsys):
    bundle = tmp_path / "b.json"
    code, out, _ = run(capsys, "train", symbol_dataset, "--output", bundle, "--seed", 5)
    assert code == 0 and "2 pthmm models" in out
    doc = json.loads(bundle.read_text())
    assert doc["format_version"] == 1
    assert doc["codebooks"] == [None, None]
    assert [m["label"] for m in doc["models"]] == ["down", "up"]
    assert doc["config"]["seed"] == 5
    assert {m["N"] for m in doc["models"]} == {4}
    probe = symbol_dataset / "up" / "s0.csv"
    code, out, _ = run(capsys, "classify", bundle, probe)
    assert code == 0
    first = out.splitlines()[0].split("\t")
    assert first[:2] == ["1", "up"]


def test_training_is_byte_stable(symbol_dataset, tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run(capsys, "train", symbol_dataset, "--output", out, "--seed", 9)[0] == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("family", ["hmm", "pthmm"])
def test_bundle_round_trip_reproduces_scores(feature_dataset, tmp_path, family):
    cfg = PipelineConfig(family=family, num_symbols=4, seed=3)
    bundle = pipeline_train(cfg, feature_dataset)
    path = tmp_path / "bundle.json"
    save_bundle(bundle, path)
    again = load_bundle(path)
    probe = feature_dataset / "right" / "f1.csv"
    assert pipeline_classify(bundle, probe).ranking == pipeline_classify(again, probe).ranking
    if family == "hmm":
        assert pipeline_classify(again, probe).ranking[0][0] == "right"
    save_bundle(again, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == path.read_bytes()


def test_fused_classification(symbol_dataset, tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "train", symbol_dataset, "--output", a)
    run(capsys, "train", symbol_dataset, "--output", b, "--family", "hmm")
    code, out, _ = run(capsys, "classify", a, symbol_dataset / "down" / "s1.csv", "--fuse", b)
    assert code == 0
    fused = [line for line in out.splitlines() if line.startswith("fused")]
    assert len(fused) == 1
    assert fused[0].split("\t")[1] == "down"
    assert "branch=" in fused[0]


def test_wav_features_and_training(tmp_path, capsys):
    rng = np.random.default_rng(2)
    root = tmp_path / "audio"
    for label, freq in (("low", 300.0), ("high", 2500.0)):
        d = root / label
        d.mkdir(parents=True)
        for k in range(2):
            t = np.arange(4096) / 16000
            write_wav(d / f"w{k}.wav", 0.5 * np.sin(2 * np.pi * freq * t) + 0.01 * rng.normal(size=t.size), 16000)
    code, out, _ = run(capsys, "features", root / "low" / "w0.wav")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t," + ",".join(f"f{i}" for i in range(12))
    assert len(lines) == 1 + 1 + (4096 - 256) // 128
    bundle = tmp_path / "audio.json"
    assert run(capsys, "train", root, "--output", bundle)[0] == 0
    code, out, _ = run(capsys, "classify", bundle, root / "high" / "w1.wav")
    assert code == 0 and out.split("\t")[1] == "high"


def test_fuse_command(capsys):
    assert run(capsys, "fuse", "A", 0.9, "B", 0.7)[1] == "A\tbranch=2\n"
    code, out, _ = run(capsys, "fuse", "A", 0.5, "B", 0.6, "--w1", 0.5135, "--w2", 0.4865)
    assert out == "B\tbranch=4\n"


def test_bench_command_small(capsys):
    code, out, _ = run(capsys, "bench", "--sizes", "2,4,8,16", "--length", 50, "--trials", 1)
    assert code == 0
    report = json.loads(out)
    for key in ("n", "t", "hmm_ns", "pthmm_ns", "hmm_ops", "pthmm_ops", "hmm_slope", "pthmm_slope"):
        assert key in report
    assert report["n"] == [2, 4, 8, 16]


@pytest.mark.parametrize(
    "argv, code_word",
    [
        (["train", "/nonexistent/dir"], "argument"),
        (["bogus"], "argument"),
        (["fuse", "A", "2.0", "B", "0.5"], "argument"),
        (["bench", "--sizes", "4,8"], "argument"),
        (["train", ".", "--seed", "-1"], "argument"),
    ],
)
def test_errors_are_single_line(argv, code_word, capsys):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert err.count("\n") == 1
    assert err.startswith(f"ptseq-error: {code_word}:")


def test_missing_directory_is_named(capsys):
    _, _, err = run(capsys, "train", "/nonexistent/dir")
    assert "/nonexistent/dir" in err


def test_empty_class_named(tmp_path, capsys):
    for name in ("alpha", "beta"):
        (tmp_path / "ds" / name).mkdir(parents=True)
    write_symbols(tmp_path / "ds" / "beta" / "x.csv", [0, 1])
    code, _, err = run(capsys, "train", tmp_path / "ds")
    assert code == 2 and "'alpha'" in err


def test_malformed_csv_reports_row(tmp_path, capsys):
    d = tmp_path / "ds" / "c"
    d.mkdir(parents=True)
    (d / "bad.csv").write_text("t,f0,f1\n0,1.0,2.0\n1,oops,3.0\n", encoding="utf-8")
    with pytest.raises(FormatError, match="row 3"):
        read_csv_sequence(d / "bad.csv")
    code, _, err = run(capsys, "train", tmp_path / "ds")
    assert code == 2 and err.startswith("ptseq-error: format:") and "row 3" in err


def test_alphabet_mismatch(symbol_dataset, tmp_path, capsys):
    bundle = tmp_path / "b.json"
    run(capsys, "train", symbol_dataset, "--output", bundle)
    probe = tmp_path / "p.csv"
    write_symbols(probe, [0, 7])
    code, _, err = run(capsys, "classify", bundle, probe)
    assert code == 2 and err.startswith("ptseq-error: argument:")


def test_defaults():
    cfg = PipelineConfig()
    assert (cfg.num_states, cfg.num_symbols, cfg.family, cfg.algebra) == (4, 4, "pthmm", "minmax")
