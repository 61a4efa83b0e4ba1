"""Run configuration and the train / eval / predict orchestration used by
the CLI. A run directory holds everything needed to featurize new text
identically: run config, vocabulary, embedding index, and the member
networks (see ensemble.TrainedEnsemble.save).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, asdict

import numpy as np

from . import corpus as corpus_mod
from .ensemble import ArchRanges, EnsembleConfig, TrainedEnsemble, majority_vote, train_ensemble
from .features import (Vocabulary, build_vocabulary, load_embeddings,
                       sequence_matrix, tfidf_matrix)
from .metrics import confusion, derive_metrics
from .preprocess import PreprocessConfig, load_stoplist, preprocess


class ConfigError(ValueError):
    pass


@dataclass
class FeatureConfig:
    min_df: int = 1
    max_features: int = 20000
    max_len: int = 128
    l2_normalize: bool = False
    embedding_path: str | None = None
    embedding_dim: int | None = None


@dataclass
class PreprocessOptions:
    lowercase: bool = True
    remove_stopwords: bool = True
    stem: bool = True
    stoplist_path: str | None = None

    def resolve(self) -> PreprocessConfig:
        cfg = PreprocessConfig(lowercase=self.lowercase,
                               remove_stopwords=self.remove_stopwords,
                               stem=self.stem)
        if self.stoplist_path:
            cfg.stopwords = load_stoplist(self.stoplist_path)
        return cfg


@dataclass
class RunConfig:
    preprocess: PreprocessOptions = field(default_factory=PreprocessOptions)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    output_dir: str = "run"
    jobs: int = 1
    quiet: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _from_dict(cls, data: dict, path: str):
    """Build a dataclass from a dict, rejecting unknown keys."""
    fields = {f.name: f for f in cls.__dataclass_fields__.values()}
    kwargs = {}
    for key, value in data.items():
        if key not in fields:
            raise ConfigError(f"unknown config key {path}{key!r}")
        sub = {"preprocess": PreprocessOptions, "features": FeatureConfig,
               "ensemble": EnsembleConfig, "ranges": ArchRanges}.get(key)
        if sub is not None and isinstance(value, dict):
            kwargs[key] = _from_dict(sub, value, f"{path}{key}.")
        elif isinstance(value, list):
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    return cls(**kwargs)


def load_run_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    cfg = _from_dict(RunConfig, data, "")
    cfg.ensemble.validate()
    return cfg


def featurize(texts: list[str], pc: PreprocessConfig, vocab: Vocabulary,
              fc: FeatureConfig, emb_index: dict[str, int] | None):
    """(tfidf matrix, sequence matrix or None) for already-loaded artifacts."""
    tokens = [preprocess(t, pc) for t in texts]
    X_tfidf = tfidf_matrix(tokens, vocab, l2_normalize=fc.l2_normalize)
    X_seq = None
    if emb_index is not None:
        X_seq = sequence_matrix(tokens, emb_index, fc.max_len)
    return X_tfidf, X_seq


def train_run(config: RunConfig, corpus_path: str, progress=None) -> str:
    """Full training pipeline; returns the run directory."""
    corp = corpus_mod.load_corpus(corpus_path)
    labels = corp.labels()
    pc = config.preprocess.resolve()
    tokens = [preprocess(t, pc) for t in corp.texts()]
    vocab = build_vocabulary(tokens, min_df=config.features.min_df,
                             max_features=config.features.max_features)
    X_tfidf = tfidf_matrix(tokens, vocab, l2_normalize=config.features.l2_normalize)

    X_seq = emb_matrix = emb_index = None
    if config.ensemble.c > 0:
        path = config.features.embedding_path
        if not path:
            raise ConfigError("c > 0 requires features.embedding_path")
        if config.features.embedding_dim is None:
            raise ConfigError("c > 0 requires features.embedding_dim")
        if not os.path.exists(path):
            raise ConfigError(f"embedding file not found: {path}")
        table = load_embeddings(path, config.features.embedding_dim)
        emb_index = table.index()
        emb_matrix = table.matrix()
        X_seq = sequence_matrix(tokens, emb_index, config.features.max_len)

    ens = train_ensemble(X_tfidf, X_seq, labels, config.ensemble,
                         embedding_matrix=emb_matrix, jobs=config.jobs,
                         progress=progress)

    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    ens.save(out)
    with open(os.path.join(out, "run_config.json"), "w") as f:
        json.dump(config.to_dict(), f, indent=2, sort_keys=True)
    with open(os.path.join(out, "vocab.json"), "w") as f:
        f.write(vocab.to_json())
    if emb_index is not None:
        with open(os.path.join(out, "emb_index.json"), "w") as f:
            json.dump(emb_index, f)
    report = {
        "models": [
            {"index": i, "family": s.family, "seed": s.seed,
             "layers": s.layers, "loss_curve": ens.loss_curves[i]}
            for i, s in enumerate(ens.specs)
        ],
    }
    with open(os.path.join(out, "training_report.json"), "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
    return out


def load_run(run_dir: str):
    """(run config, ensemble, vocab, embedding index or None)."""
    with open(os.path.join(run_dir, "run_config.json")) as f:
        config = _from_dict(RunConfig, json.load(f), "")
    ens = TrainedEnsemble.load(run_dir)
    with open(os.path.join(run_dir, "vocab.json")) as f:
        vocab = Vocabulary.from_json(f.read())
    emb_index = None
    emb_path = os.path.join(run_dir, "emb_index.json")
    if os.path.exists(emb_path):
        with open(emb_path) as f:
            emb_index = json.load(f)
    return config, ens, vocab, emb_index


def eval_run(run_dir: str, corpus_path: str) -> dict:
    """Score a labeled corpus; returns per-model accuracies, the ensemble
    confusion matrix, and the full metric report."""
    config, ens, vocab, emb_index = load_run(run_dir)
    corp = corpus_mod.load_corpus(corpus_path)
    labels = np.array(corp.labels())
    X_tfidf, X_seq = featurize(corp.texts(), config.preprocess.resolve(),
                               vocab, config.features, emb_index)
    votes = ens.predict_votes(X_tfidf, X_seq)
    final = np.array([majority_vote(row) for row in votes])
    cm = confusion(final.tolist(), labels.tolist())
    report = derive_metrics(cm)
    per_model = [float((votes[:, j] == labels).mean()) for j in range(votes.shape[1])]
    return {
        "confusion": {"tp": cm.tp, "fp": cm.fp, "fn": cm.fn, "tn": cm.tn},
        "metrics": report.to_dict(),
        "per_model_accuracy": per_model,
        "report": report,
    }


def predict_run(run_dir: str, input_path: str) -> list[dict]:
    """Predict rows {id, votes, final} for possibly-unlabeled input."""
    config, ens, vocab, emb_index = load_run(run_dir)
    corp = corpus_mod.load_corpus(input_path, allow_empty=True)
    if not corp.documents:
        return []
    X_tfidf, X_seq = featurize(corp.texts(), config.preprocess.resolve(),
                               vocab, config.features, emb_index)
    votes = ens.predict_votes(X_tfidf, X_seq)
    return [
        {"id": doc.id, "votes": [int(v) for v in votes[i]],
         "final": majority_vote(votes[i])}
        for i, doc in enumerate(corp.documents)
    ]
