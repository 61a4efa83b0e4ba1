import json
import os

import numpy as np
import pytest

from textvote.cli import main
from textvote.corpus import make_synthetic, save_corpus, split
from textvote.ensemble import majority_vote


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    corp = make_synthetic(240, overlap=0.2, seed=21)
    train, test = split(corp, 0.25, seed=1)
    train_path = str(root / "train.jsonl")
    test_path = str(root / "test.jsonl")
    save_corpus(train, train_path)
    save_corpus(test, test_path)
    config = {
        "ensemble": {"d": 3, "c": 0, "epochs": 4, "seed": 77,
                     "ranges": {"dnn_layers": [1, 1], "dnn_units": [8, 32],
                                "dropout": [0.0, 0.0]}},
        "output_dir": str(root / "run"),
    }
    cfg_path = str(root / "cfg.json")
    with open(cfg_path, "w") as f:
        json.dump(config, f)
    assert main(["train", train_path, "--config", cfg_path, "--quiet"]) == 0
    return {"root": root, "train": train_path, "test": test_path,
            "cfg": cfg_path, "run": str(root / "run")}


def test_train_writes_artifacts(workspace):
    run = workspace["run"]
    names = set(os.listdir(run))
    assert {"manifest.json", "run_config.json", "vocab.json",
            "training_report.json"} <= names
    assert sum(1 for n in names if n.endswith(".net")) == 3
    report = json.load(open(os.path.join(run, "training_report.json")))
    assert len(report["models"]) == 3
    assert all(len(m["loss_curve"]) == 4 for m in report["models"])


def test_eval_reports_metrics(workspace, capsys):
    assert main(["eval", workspace["run"], workspace["test"]]) == 0
    out = capsys.readouterr().out
    assert "Accuracy" in out and "ensemble accuracy" in out
    data = json.load(open(os.path.join(workspace["run"], "eval.json")))
    assert len(data["per_model_accuracy"]) == 3
    assert set(data["confusion"]) == {"tp", "fp", "fn", "tn"}


def test_predict_schema_and_self_consistency(workspace):
    out_path = str(workspace["root"] / "preds.jsonl")
    assert main(["predict", workspace["run"], workspace["test"],
                 "--out", out_path]) == 0
    rows = [json.loads(l) for l in open(out_path)]
    assert rows
    for row in rows:
        assert set(row) == {"id", "votes", "final"}
        assert len(row["votes"]) == 3
        assert row["final"] == majority_vote(row["votes"])


def test_predict_empty_input(workspace):
    empty = workspace["root"] / "empty.jsonl"
    empty.write_text("")
    out_path = str(workspace["root"] / "empty_out.jsonl")
    assert main(["predict", workspace["run"], str(empty), "--out", out_path]) == 0
    assert open(out_path).read() == ""


def test_train_deterministic_manifest(workspace, tmp_path):
    cfg = json.load(open(workspace["cfg"]))
    results = []
    for name in ("runA", "runB"):
        cfg["output_dir"] = str(tmp_path / name)
        cfg_path = str(tmp_path / f"{name}.json")
        json.dump(cfg, open(cfg_path, "w"))
        assert main(["train", workspace["train"], "--config", cfg_path,
                     "--quiet"]) == 0
        results.append(cfg["output_dir"])
    a = open(os.path.join(results[0], "manifest.json"), "rb").read()
    b = open(os.path.join(results[1], "manifest.json"), "rb").read()
    assert a == b
    for i in range(3):
        na = open(os.path.join(results[0], f"model_{i:03d}.net"), "rb").read()
        nb = open(os.path.join(results[1], f"model_{i:03d}.net"), "rb").read()
        assert na == nb


def test_unknown_config_key_rejected(workspace, tmp_path, capsys):
    cfg_path = str(tmp_path / "bad.json")
    json.dump({"nonsense": 1}, open(cfg_path, "w"))
    assert main(["train", workspace["train"], "--config", cfg_path]) == 1
    assert "nonsense" in capsys.readouterr().err


def test_missing_embedding_file_fails_cleanly(workspace, tmp_path, capsys):
    cfg_path = str(tmp_path / "emb.json")
    json.dump({"ensemble": {"d": 2, "c": 1, "epochs": 1},
               "features": {"embedding_path": "/nope/emb.txt",
                            "embedding_dim": 4},
               "output_dir": str(tmp_path / "r")}, open(cfg_path, "w"))
    assert main(["train", workspace["train"], "--config", cfg_path]) == 1
    assert "/nope/emb.txt" in capsys.readouterr().err


def test_eval_unlabeled_corpus_fails(workspace, tmp_path, capsys):
    path = tmp_path / "nolabel.jsonl"
    path.write_text('{"id": "q", "text": "zeta000 zeta001"}\n')
    assert main(["eval", workspace["run"], str(path)]) == 1
    assert "unlabeled" in capsys.readouterr().err


def test_metrics_subcommand(tmp_path, capsys):
    path = tmp_path / "pl.csv"
    path.write_text("pred,label\n1,1\n1,1\n0,0\n1,0\n")
    json_path = str(tmp_path / "m.json")
    assert main(["metrics", str(path), "--json", json_path]) == 0
    out = capsys.readouterr().out
    assert "Accuracy" in out and "0.7500" in out
    data = json.load(open(json_path))
    assert data["accuracy"] == 0.75


def test_stats_subcommand(workspace, capsys):
    assert main(["stats", workspace["train"]]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["documents"] == 180
    assert data["balance"] == 0.5
