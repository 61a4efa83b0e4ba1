"""Feature extraction: TF-IDF vectors and padded word-index sequences.

TF-IDF weight of term t in document d is count(t, d) * ln(N / df(t)),
with N the corpus size and df(t) the number of documents containing t.
The log base is natural; any base gives the same ranking.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Vocabulary:
    term_to_index: dict[str, int]
    df: dict[str, int]
    n_docs: int

    def __len__(self) -> int:
        return len(self.term_to_index)

    def to_json(self) -> str:
        terms = [
            {"term": t, "index": i, "df": self.df[t]}
            for t, i in sorted(self.term_to_index.items(), key=lambda kv: kv[1])
        ]
        return json.dumps({"n_docs": self.n_docs, "terms": terms})

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        data = json.loads(text)
        return cls(
            term_to_index={r["term"]: r["index"] for r in data["terms"]},
            df={r["term"]: r["df"] for r in data["terms"]},
            n_docs=data["n_docs"],
        )


def build_vocabulary(corpus: list[list[str]], min_df: int = 1,
                     max_features: int | None = None) -> Vocabulary:
    """Count document frequencies and keep the top terms.

    Terms with df >= min_df are ranked by descending df, ties broken
    lexicographically, and the first max_features survive. Indices are
    assigned densely in that rank order.
    """
    if not corpus:
        raise ValueError("empty corpus")
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    df: Counter[str] = Counter()
    for tokens in corpus:
        df.update(set(tokens))
    kept = sorted(
        (t for t, c in df.items() if c >= min_df),
        key=lambda t: (-df[t], t),
    )
    if max_features is not None:
        kept = kept[:max_features]
    return Vocabulary(
        term_to_index={t: i for i, t in enumerate(kept)},
        df={t: df[t] for t in kept},
        n_docs=len(corpus),
    )


def tfidf(tokens: list[str], vocab: Vocabulary) -> dict[int, float]:
    """Sparse TF-IDF vector as {term index: weight}; zero weights omitted.

    Out-of-vocabulary tokens are skipped.
    """
    counts = Counter(tokens)
    out: dict[int, float] = {}
    for term, tf in counts.items():
        idx = vocab.term_to_index.get(term)
        if idx is None:
            continue
        w = tf * math.log(vocab.n_docs / vocab.df[term])
        if w != 0.0:
            out[idx] = w
    return out


def tfidf_matrix(corpus: list[list[str]], vocab: Vocabulary,
                 l2_normalize: bool = False) -> np.ndarray:
    """Dense (n_docs, V) TF-IDF matrix, optionally row-normalized."""
    X = np.zeros((len(corpus), len(vocab)))
    for row, tokens in enumerate(corpus):
        for idx, w in tfidf(tokens, vocab).items():
            X[row, idx] = w
    if l2_normalize:
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        np.divide(X, norms, out=X, where=norms > 0)
    return X


@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def lookup(self, word: str) -> np.ndarray:
        vec = self.vectors.get(word)
        if vec is None:
            return np.zeros(self.dim)
        return vec

    def index(self) -> dict[str, int]:
        """term -> row number, in insertion (file) order."""
        return {w: i for i, w in enumerate(self.vectors)}

    def matrix(self) -> np.ndarray:
        """(V_emb + 1, dim) array; row 0 is the all-zero padding vector."""
        M = np.zeros((len(self.vectors) + 1, self.dim))
        for i, vec in enumerate(self.vectors.values()):
            M[i + 1] = vec
        return M


def load_embeddings(path: str, expected_dim: int) -> EmbeddingTable:
    """Parse a pretrained-embedding text file: `word v1 ... vd` per line.

    A line whose arity disagrees with expected_dim is an error naming the
    line number. An empty file yields an empty (all-OOV) table.
    """
    table = EmbeddingTable(dim=expected_dim)
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != expected_dim + 1:
                raise ValueError(
                    f"{path}: line {lineno}: expected {expected_dim} values, "
                    f"got {len(parts) - 1}"
                )
            table.vectors[parts[0]] = np.array([float(x) for x in parts[1:]])
    return table


def encode_sequence(tokens: list[str], term_index: dict[str, int],
                    max_len: int) -> np.ndarray:
    """Map tokens to embedding-row indices, padded/truncated to max_len.

    Row indices are offset by +1 so 0 can serve as padding. Tokens absent
    from term_index are skipped, not padded.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    seq = np.zeros(max_len, dtype=np.int64)
    pos = 0
    for tok in tokens:
        if pos == max_len:
            break
        idx = term_index.get(tok)
        if idx is not None:
            seq[pos] = idx + 1
            pos += 1
    return seq


def sequence_matrix(corpus: list[list[str]], term_index: dict[str, int],
                    max_len: int) -> np.ndarray:
    return np.stack([encode_sequence(t, term_index, max_len) for t in corpus])
