import json
import subprocess
import sys

import numpy as np
import pytest

from clockforge.cli import main
from clockforge.dataio import load_labels, load_predictions, save_series


def tree_bytes(root):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("gen")
    assert main(["generate", "--n", "6", "--seed", "7", "--preset", "simple", "--size", "160",
                 "--no-warp", "--no-artefacts", "--no-augment", "--out", str(root / "d")]) == 0
    return root / "d"


def test_generate_layout(dataset):
    assert len(list((dataset / "images").glob("*.png"))) == 6
    assert len(list((dataset / "meta").glob("*.json"))) == 6
    assert len(load_labels(dataset / "labels.csv")) == 6


def test_generate_threads_and_seed_env(tmp_path, monkeypatch):
    args = ["generate", "--n", "3", "--preset", "full", "--size", "64"]
    monkeypatch.setenv("CLOCKFORGE_SEED", "5")
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    monkeypatch.delenv("CLOCKFORGE_SEED")
    assert main(args + ["--seed", "5", "--threads", "3", "--out", str(tmp_path / "b")]) == 0
    assert main(args + ["--seed", "6", "--out", str(tmp_path / "c")]) == 0
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b")
    assert tree_bytes(tmp_path / "a") != tree_bytes(tmp_path / "c")


def test_read_and_evaluate(dataset, tmp_path, capsys):
    preds = tmp_path / "p.csv"
    assert main(["read", "--in", str(dataset / "images"), "--out", str(preds), "--threads", "2"]) == 0
    got = load_predictions(preds)
    assert len(got) == 6 and all(1 <= len(v) <= 3 for v in got.values())
    capsys.readouterr()
    assert main(["evaluate", "--labels", str(dataset / "labels.csv"), "--preds", str(preds),
                 "--report", str(tmp_path / "r.json")]) == 0
    out = capsys.readouterr().out
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["n"] == 6 and report["top1"] == 1.0
    assert "top1" in out and "100.00%" in out


def test_read_to_stdout(dataset, capsys):
    assert main(["read", "--in", str(dataset / "images" / "000000.png")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "filename,pred_class,score,rank" and lines[1].startswith("000000.png,")


def test_calibrate_and_plot(tmp_path):
    f = np.arange(60)
    p = (np.floor(100 + 4.0 * f + 0.5).astype(int)) % 720
    p[[5, 20, 33]] = [0, 400, 17]
    save_series(tmp_path / "s.csv", f, p)
    args = ["calibrate", "--in", str(tmp_path / "s.csv"), "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "c.csv"), "--report", str(tmp_path / "fit.json")]) == 0
    rep = json.loads((tmp_path / "fit.json").read_text())
    assert rep["accepted"] and rep["seed"] == 3 and abs(rep["slope"] - 4.0) < 0.05
    assert (tmp_path / "c.csv").read_text().splitlines()[6] == f"5,{(100 + 20) % 720}"
    assert main(["plot", "--in", str(tmp_path / "s.csv"), "--out", str(tmp_path / "s.svg")]) == 0
    assert (tmp_path / "s.svg").read_text().startswith("<svg")


def test_demo_small(tmp_path, capsys):
    assert main(["demo", "--seed", "1", "--frames", "30", "--out", str(tmp_path / "demo")]) == 0
    out = capsys.readouterr().out
    assert "raw accuracy" in out and "calibrated accuracy" in out
    summary = json.loads((tmp_path / "demo" / "demo.json").read_text())
    assert summary["calibrated_accuracy"] >= summary["raw_accuracy"]


@pytest.mark.parametrize(
    "argv",
    [[], ["bogus"], ["generate", "--n", "0", "--out", "x"], ["calibrate"], ["demo", "--outlier-fraction", "1.5"]],
)
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1


def test_bad_seed_env_is_usage_error(monkeypatch, tmp_path):
    monkeypatch.setenv("CLOCKFORGE_SEED", "abc")
    assert main(["plot", "--in", str(tmp_path / "x.csv"), "--out", str(tmp_path / "y.svg")]) == 1


def test_data_errors_exit_2(tmp_path, capsys):
    assert main(["calibrate", "--in", str(tmp_path / "missing.csv")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("frame_index,pred_class\n0,1\n0,2\n")
    assert main(["calibrate", "--in", str(bad)]) == 2
    assert "line 3" in capsys.readouterr().err
    labels = tmp_path / "l.csv"
    labels.write_text("filename,hour,minute\na.png,12,0\n")
    preds = tmp_path / "p.csv"
    preds.write_text("filename,pred_class,score,rank\n")
    assert main(["evaluate", "--labels", str(labels), "--preds", str(preds)]) == 2
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["read", "--in", str(empty)]) == 2


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "generate" in capsys.readouterr().out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "clockforge", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "0.1.0" in r.stdout
