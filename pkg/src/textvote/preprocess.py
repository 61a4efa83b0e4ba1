"""Text normalization pipeline: tokenize, lowercase, stop-word removal, stemming.

The four steps always run in that fixed order when enabled. The stemming/
stop-word ordering is a documented convention, not something the pipeline
depends on.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

from .porter import stem

# Built-in English stop list. Deliberately a superset of the short
# illustrative set {am, is, above, are, there, his, him}.
DEFAULT_STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because
been before being below between both but by could did do does doing down
during each few for from further had has have having he her here hers
herself him himself his how i if in into is it its itself just me more
most my myself no nor not now of off on once only or other our ours
ourselves out over own same she should so some such than that the their
theirs them themselves then there these they this those through to too
under until up very was we were what when where which while who whom why
will with you your yours yourself yourselves
""".split())


@dataclass
class PreprocessConfig:
    lowercase: bool = True
    remove_stopwords: bool = True
    stem: bool = True
    stopwords: frozenset[str] = field(default_factory=lambda: DEFAULT_STOPWORDS)


def load_stoplist(path: str) -> frozenset[str]:
    """Read a stop list: UTF-8, one word per line, '#' lines are comments."""
    words = set()
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line.lower())
    return frozenset(words)


# punctuation allowed inside a word (contractions, hyphenations)
_INTRA_WORD = {"-", "'", "’"}


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _split_piece(piece: str) -> list[str]:
    """Break one whitespace-delimited piece at punctuation.

    Apostrophes and hyphens survive between word characters; every other
    punctuation mark separates, and leading/trailing marks are stripped.
    """
    tokens: list[str] = []
    current: list[str] = []
    for i, ch in enumerate(piece):
        if not _is_punct(ch):
            current.append(ch)
        elif (ch in _INTRA_WORD and current
              and i + 1 < len(piece) and not _is_punct(piece[i + 1])):
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


def tokenize(text: str) -> list[str]:
    """Split on whitespace, then at punctuation within each piece.

    Pieces that reduce to nothing are dropped; order is preserved. Input
    is NFC-normalized first so composed/decomposed forms agree. Emoji and
    other symbol characters are kept.
    """
    text = unicodedata.normalize("NFC", text)
    tokens = []
    for piece in text.split():
        tokens.extend(_split_piece(piece))
    return tokens


def lowercase(tokens: list[str]) -> list[str]:
    return [t.lower() for t in tokens]


def remove_stopwords(tokens: list[str], stopwords=DEFAULT_STOPWORDS) -> list[str]:
    return [t for t in tokens if t not in stopwords]


def stem_tokens(tokens: list[str]) -> list[str]:
    return [stem(t) for t in tokens]


def preprocess(text: str, config: PreprocessConfig | None = None) -> list[str]:
    """Full pipeline: tokenize -> lowercase -> stop words -> stem."""
    if config is None:
        config = PreprocessConfig()
    tokens = tokenize(text)
    if config.lowercase:
        tokens = lowercase(tokens)
    if config.remove_stopwords:
        tokens = remove_stopwords(tokens, config.stopwords)
    if config.stem:
        tokens = stem_tokens(tokens)
    return tokens
