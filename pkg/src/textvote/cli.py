"""Command-line interface.

Subcommands: train, eval, predict, metrics, stats.
Exit codes: 0 success, 1 validation error, 2 runtime/numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import corpus as corpus_mod
from .corpus import CorpusError
from .ensemble import TrainingError
from .metrics import confusion, derive_metrics, report_text
from .pipeline import (ConfigError, RunConfig, eval_run, load_run_config,
                       predict_run, train_run)


def _cmd_train(args) -> int:
    if args.config:
        config = load_run_config(args.config)
    else:
        config = RunConfig()
    if args.out:
        config.output_dir = args.out
    if args.jobs:
        config.jobs = args.jobs
    if args.quiet:
        config.quiet = True

    def progress(i, curve):
        if not config.quiet:
            print(f"model {i}: trained {len(curve)} epochs, "
                  f"final loss {curve[-1]:.4f}", file=sys.stderr)

    out = train_run(config, args.corpus, progress=progress)
    if not config.quiet:
        print(f"run saved to {out}", file=sys.stderr)
    return 0


def _cmd_eval(args) -> int:
    result = eval_run(args.model_dir, args.corpus)
    print(report_text(result["report"]))
    print()
    for i, acc in enumerate(result["per_model_accuracy"]):
        print(f"model {i} accuracy: {acc:.4f}")
    print(f"ensemble accuracy: {result['metrics']['accuracy']:.4f}")
    out = {k: v for k, v in result.items() if k != "report"}
    json_path = args.json or os.path.join(args.model_dir, "eval.json")
    with open(json_path, "w") as f:
        json.dump(out, f, indent=2, sort_keys=True)
    return 0


def _cmd_predict(args) -> int:
    rows = predict_run(args.model_dir, args.input)
    sink = open(args.out, "w") if args.out else sys.stdout
    try:
        for row in rows:
            sink.write(json.dumps(row) + "\n")
    finally:
        if args.out:
            sink.close()
    return 0


def _read_pred_label_file(path: str) -> tuple[list[int], list[int]]:
    preds, labels = [], []
    with open(path, encoding="utf-8", newline="") as f:
        if path.endswith(".jsonl"):
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                row = json.loads(line)
                if "pred" not in row or "label" not in row:
                    raise CorpusError(f"{path}: line {lineno}: need pred and label")
                preds.append(int(row["pred"]))
                labels.append(int(row["label"]))
        else:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or not {"pred", "label"} <= set(reader.fieldnames):
                raise CorpusError(f"{path}: need columns pred,label")
            for row in reader:
                preds.append(int(row["pred"]))
                labels.append(int(row["label"]))
    return preds, labels


def _cmd_metrics(args) -> int:
    preds, labels = _read_pred_label_file(args.file)
    report = derive_metrics(confusion(preds, labels), beta=args.beta)
    print(report_text(report))
    if args.json:
        with open(args.json, "w") as f:
            f.write(report.to_json())
    return 0


def _cmd_stats(args) -> int:
    corp = corpus_mod.load_corpus(args.corpus)
    print(json.dumps(corpus_mod.stats(corp), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="textvote",
                                description="Ensemble text classification toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train an ensemble on a labeled corpus")
    t.add_argument("corpus", help="labeled corpus (csv/tsv/jsonl)")
    t.add_argument("--config", help="JSON run-config file")
    t.add_argument("--out", help="output run directory (overrides config)")
    t.add_argument("--jobs", type=int, help="max concurrent model trainings")
    t.add_argument("--quiet", action="store_true")
    t.set_defaults(func=_cmd_train)

    e = sub.add_parser("eval", help="score a labeled corpus with a trained run")
    e.add_argument("model_dir")
    e.add_argument("corpus")
    e.add_argument("--json", help="where to write the JSON report")
    e.set_defaults(func=_cmd_eval)

    pr = sub.add_parser("predict", help="emit jsonl {id, votes, final} rows")
    pr.add_argument("model_dir")
    pr.add_argument("input", help="corpus file; labels optional")
    pr.add_argument("--out", help="output jsonl path (default stdout)")
    pr.set_defaults(func=_cmd_predict)

    m = sub.add_parser("metrics", help="metric report from a predictions+labels file")
    m.add_argument("file", help="csv with pred,label columns or jsonl rows")
    m.add_argument("--beta", type=float, default=1.0)
    m.add_argument("--json", help="where to write the JSON report")
    m.set_defaults(func=_cmd_metrics)

    s = sub.add_parser("stats", help="corpus summary statistics")
    s.add_argument("corpus")
    s.set_defaults(func=_cmd_stats)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CorpusError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (TrainingError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
