"""Labeled-corpus loading, stratified splitting, stats, and a synthetic
two-class generator used for tests and demos.

Formats: csv/tsv with a header row (columns id, text, label; label may be
missing for predict-only input) and jsonl with the same keys. One row is
one author's full text blob.
"""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .preprocess import PreprocessConfig, preprocess

DEFAULT_LABEL_MAP = {"female": 0, "male": 1, "0": 0, "1": 1}


class CorpusError(ValueError):
    pass


@dataclass
class Document:
    id: str
    text: str
    label: int | None = None


@dataclass
class Corpus:
    documents: list[Document] = field(default_factory=list)
    label_map: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_LABEL_MAP))

    def __len__(self) -> int:
        return len(self.documents)

    def labels(self) -> list[int]:
        missing = [d.id for d in self.documents if d.label is None]
        if missing:
            raise CorpusError(f"unlabeled documents: {missing[:5]}")
        return [d.label for d in self.documents]

    def texts(self) -> list[str]:
        return [d.text for d in self.documents]


def _map_label(raw, label_map, where: str) -> int | None:
    if raw is None or raw == "":
        return None
    key = str(raw).strip().lower()
    if key not in label_map:
        raise CorpusError(f"{where}: unknown label {raw!r}")
    return label_map[key]


def load_corpus(path: str, fmt: str | None = None,
                label_map: dict[str, int] | None = None,
                allow_empty: bool = False) -> Corpus:
    """Load csv/tsv/jsonl; format inferred from the extension if not given."""
    if label_map is None:
        label_map = dict(DEFAULT_LABEL_MAP)
    if fmt is None:
        ext = os.path.splitext(path)[1].lower().lstrip(".")
        fmt = {"csv": "csv", "tsv": "tsv", "jsonl": "jsonl"}.get(ext)
        if fmt is None:
            raise CorpusError(f"cannot infer format from {path!r}; pass fmt")
    docs: list[Document] = []
    seen: set[str] = set()

    def add(doc_id, text, raw_label, where):
        if doc_id is None or text is None:
            raise CorpusError(f"{where}: missing id or text")
        doc_id = str(doc_id)
        if doc_id in seen:
            raise CorpusError(f"{where}: duplicate id {doc_id!r}")
        seen.add(doc_id)
        docs.append(Document(id=doc_id, text=text,
                             label=_map_label(raw_label, label_map, where)))

    with open(path, encoding="utf-8", newline="") as f:
        if fmt == "jsonl":
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as e:
                    raise CorpusError(f"{path}: line {lineno}: bad JSON ({e})") from e
                add(row.get("id"), row.get("text"), row.get("label"),
                    f"{path}: line {lineno}")
        else:
            reader = csv.DictReader(f, delimiter="\t" if fmt == "tsv" else ",")
            if reader.fieldnames is None:
                if allow_empty:
                    return Corpus(documents=[], label_map=label_map)
                raise CorpusError("empty corpus")
            for col in ("id", "text"):
                if col not in reader.fieldnames:
                    raise CorpusError(f"{path}: missing required column {col!r}")
            has_label = "label" in reader.fieldnames
            for lineno, row in enumerate(reader, start=2):
                add(row.get("id"), row.get("text"),
                    row.get("label") if has_label else None,
                    f"{path}: line {lineno}")
    if not docs and not allow_empty:
        raise CorpusError("empty corpus")
    return Corpus(documents=docs, label_map=label_map)


def save_corpus(corpus: Corpus, path: str) -> None:
    """jsonl writer; load(save(c)) round-trips exactly."""
    with open(path, "w", encoding="utf-8") as f:
        for d in corpus.documents:
            row = {"id": d.id, "text": d.text}
            if d.label is not None:
                row["label"] = d.label
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def split(corpus: Corpus, test_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Stratified, seeded train/test partition.

    Per-class test counts are round(test_fraction * class size), so class
    proportions are preserved to within one document.
    """
    if not 0 < test_fraction < 1:
        raise CorpusError(f"test_fraction must be in (0, 1), got {test_fraction}")
    by_class: dict[int, list[Document]] = {}
    for d in corpus.documents:
        if d.label is None:
            raise CorpusError(f"document {d.id!r} has no label; cannot stratify")
        by_class.setdefault(d.label, []).append(d)
    rng = np.random.default_rng(seed)
    train_docs: list[Document] = []
    test_docs: list[Document] = []
    for label in sorted(by_class):
        docs = by_class[label]
        if len(docs) < 2:
            raise CorpusError(f"class {label} has fewer than 2 documents")
        order = rng.permutation(len(docs))
        n_test = int(round(test_fraction * len(docs)))
        n_test = min(max(n_test, 1), len(docs) - 1)
        test_docs.extend(docs[i] for i in order[:n_test])
        train_docs.extend(docs[i] for i in order[n_test:])
    return (Corpus(train_docs, corpus.label_map),
            Corpus(test_docs, corpus.label_map))


def stats(corpus: Corpus, config: PreprocessConfig | None = None) -> dict:
    """Document count, class balance, and a power-of-two token-count histogram."""
    labels = [d.label for d in corpus.documents if d.label is not None]
    balance = None
    if labels:
        counts = Counter(labels)
        balance = max(counts.values()) / len(labels)
        if len(counts) == 1:
            warnings.warn("corpus contains a single class")
    histogram: Counter[int] = Counter()
    for d in corpus.documents:
        n = len(preprocess(d.text, config))
        bucket = 0 if n == 0 else 2 ** math.ceil(math.log2(n)) if n > 1 else 1
        histogram[bucket] += 1
    return {
        "documents": len(corpus.documents),
        "labeled": len(labels),
        "class_counts": dict(Counter(labels)),
        "balance": balance,
        "token_histogram": {str(k): v for k, v in sorted(histogram.items())},
    }


def make_synthetic(n_docs: int, overlap: float = 0.2, seed: int = 0,
                   class_vocab: int = 40, shared_vocab: int = 40,
                   doc_len: tuple[int, int] = (20, 40)) -> Corpus:
    """Two-class corpus from class-specific and shared token pools.

    Each token is drawn from the document's class pool with probability
    1 - overlap, otherwise from the shared pool; overlap near 0 makes the
    classes trivially separable, overlap near 1 makes them identical.
    """
    if not 0 <= overlap <= 1:
        raise ValueError("overlap must be in [0, 1]")
    rng = np.random.default_rng(seed)
    pools = {
        0: [f"zeta{i:03d}" for i in range(class_vocab)],
        1: [f"omega{i:03d}" for i in range(class_vocab)],
    }
    shared = [f"common{i:03d}" for i in range(shared_vocab)]
    docs = []
    for i in range(n_docs):
        label = i % 2
        n_tokens = int(rng.integers(doc_len[0], doc_len[1] + 1))
        words = [
            shared[rng.integers(len(shared))]
            if rng.random() < overlap else pools[label][rng.integers(class_vocab)]
            for _ in range(n_tokens)
        ]
        docs.append(Document(id=f"doc{i:05d}", text=" ".join(words), label=label))
    return Corpus(documents=docs)
