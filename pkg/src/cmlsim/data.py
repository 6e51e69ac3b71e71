"""Corpus ingestion, bag-of-words featurization, splitting and synthetic corpora."""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .model import LabeledSample

__all__ = [
    "DataError",
    "Vocabulary",
    "BagOfWordsVocabulary",
    "DatasetSplit",
    "DatasetSource",
    "tokenize",
    "build_vocabulary",
    "featurize",
    "load_indexed",
    "save_indexed",
    "load_text",
    "split",
    "synthesize",
    "load_source",
]

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


class DataError(ValueError):
    pass


def tokenize(text: str) -> list:
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


@dataclass(frozen=True)
class Vocabulary:
    rank_of: dict
    num_words: int


def build_vocabulary(corpus: Iterable[Sequence[str]], num_words: int) -> Vocabulary:
    """Keep the ``num_words`` most frequent tokens; ties go to the earlier first occurrence."""
    if num_words < 1:
        raise DataError("num_words must be >= 1")
    counts: Counter = Counter()
    first_seen: dict = {}
    pos = 0
    for doc in corpus:
        for tok in doc:
            counts[tok] += 1
            if tok not in first_seen:
                first_seen[tok] = pos
            pos += 1
    if len(counts) < num_words:
        raise DataError("vocabulary underflow")
    ranked = sorted(counts, key=lambda t: (-counts[t], first_seen[t]))[:num_words]
    return Vocabulary({tok: r for r, tok in enumerate(ranked)}, num_words)


def featurize(tokens: Iterable[str], vocab: Vocabulary) -> tuple:
    rank_of = vocab.rank_of
    return tuple(sorted({rank_of[t] for t in tokens if t in rank_of}))


class BagOfWordsVocabulary(TransformerMixin, BaseEstimator):
    """Turns token lists into sorted binary-feature index tuples.

    ``fit`` ranks the corpus vocabulary by frequency and keeps the top
    ``num_words``; ``transform`` maps each document to the ranks of the
    vocabulary words it contains. Raw strings are tokenized first.
    """

    def __init__(self, num_words=1000):
        self.num_words = num_words

    def fit(self, X, y=None):
        self.vocabulary_ = build_vocabulary(_as_tokens(X), self.num_words)
        return self

    def transform(self, X):
        check_is_fitted(self, "vocabulary_")
        return [featurize(doc, self.vocabulary_) for doc in _as_tokens(X)]


def _as_tokens(X):
    return [tokenize(doc) if isinstance(doc, str) else list(doc) for doc in X]


def _parse_label(raw: str, lineno: int) -> int:
    try:
        label = int(raw.strip())
    except ValueError:
        raise DataError(f"parse error at line {lineno}") from None
    if label not in (0, 1):
        raise DataError(f"invalid label at line {lineno}")
    return label


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def load_indexed(path, num_words: int) -> list:
    """Read ``<label>\\t<i,j,...>`` lines, dropping indices ``>= num_words``."""
    samples = []
    for lineno, line in _data_lines(path):
        label_part, sep, feat_part = line.partition("\t")
        if not sep:
            raise DataError(f"parse error at line {lineno}")
        label = _parse_label(label_part, lineno)
        feats = set()
        for tok in feat_part.split(","):
            tok = tok.strip()
            if not tok:
                continue
            try:
                i = int(tok)
            except ValueError:
                raise DataError(f"parse error at line {lineno}") from None
            if i < 0:
                raise DataError(f"parse error at line {lineno}")
            if i < num_words:
                feats.add(i)
        samples.append(LabeledSample(tuple(sorted(feats)), label))
    return samples


def save_indexed(samples: Iterable[LabeledSample], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(f"{s.label}\t{','.join(map(str, s.features))}\n")


def load_text(path) -> tuple:
    """Read ``<label>\\t<text>`` lines; returns (token lists, labels)."""
    docs, labels = [], []
    for lineno, line in _data_lines(path):
        label_part, sep, text = line.partition("\t")
        if not sep:
            raise DataError(f"parse error at line {lineno}")
        labels.append(_parse_label(label_part, lineno))
        docs.append(tokenize(text))
    return docs, labels


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass
class DatasetSplit:
    initial_train: list
    submission_pool: list
    test: list


def split(dataset: Sequence[LabeledSample], train_size: float, test_fraction: float = 0.0, seed: int = 0) -> DatasetSplit:
    if not 0 < train_size < 1:
        raise DataError("train_size must lie in (0, 1)")
    if not 0 <= test_fraction < 1:
        raise DataError("test_fraction must lie in [0, 1)")
    order = np.random.default_rng(seed).permutation(len(dataset))
    shuffled = [dataset[i] for i in order]
    n_test = _round_half_up(test_fraction * len(shuffled))
    test, rest = shuffled[:n_test], shuffled[n_test:]
    n_init = _round_half_up(train_size * len(rest))
    initial, pool = rest[:n_init], rest[n_init:]
    if not initial or not pool or (test_fraction > 0 and not test):
        raise DataError("degenerate split")
    return DatasetSplit(initial, pool, test)


def synthesize(n: int, num_words: int, seed: int = 0) -> list:
    """Linearly separable stand-in corpus.

    Each sample holds a random subset of indices; its label is 1 iff it has
    more indices in the lower half of the feature range than in the upper
    half. Ties are redrawn, so weights of +1 (lower half) and -1 (upper half)
    with zero bias classify every sample correctly.
    """
    if n < 2 or num_words < 4:
        raise DataError("synthesize needs n >= 2 and num_words >= 4")
    rng = np.random.default_rng(seed)
    half = num_words // 2
    upper_start = num_words - half
    max_k = max(3, num_words // 8)
    out = []
    while len(out) < n:
        k = int(rng.integers(1, max_k + 1))
        feats = np.sort(rng.choice(num_words, size=k, replace=False))
        lower = int(np.count_nonzero(feats < half))
        upper = int(np.count_nonzero(feats >= upper_start))
        if lower == upper:
            continue
        out.append(LabeledSample(tuple(int(i) for i in feats), 1 if lower > upper else 0))
    return out


@dataclass(frozen=True)
class DatasetSource:
    """Where a scenario's samples come from.

    ``kind`` is ``indexed``, ``text`` or ``synthetic``. With a ``test_path``
    the test partition is read from that file; otherwise ``test_fraction``
    of the shuffled samples is held out.
    """

    kind: str = "synthetic"
    path: Optional[str] = None
    test_path: Optional[str] = None
    n: int = 25000
    seed: int = 0
    test_fraction: float = 0.5

    def __post_init__(self):
        if self.kind not in ("indexed", "text", "synthetic"):
            raise ValueError("config invalid: dataset.kind")
        if self.kind != "synthetic" and not self.path:
            raise ValueError("config invalid: dataset.path")
        if not 0 <= self.test_fraction < 1:
            raise ValueError("config invalid: dataset.test_fraction")


def _require_file(path):
    if not Path(path).is_file():
        raise DataError(f"dataset file not found: {path}")


def load_source(source: DatasetSource, num_words: int, train_size: float, seed: int) -> DatasetSplit:
    """Resolve ``source`` and split it into initial / pool / test partitions."""
    if source.kind == "synthetic":
        samples = synthesize(source.n, num_words, source.seed)
        test = None
    elif source.kind == "indexed":
        _require_file(source.path)
        samples = load_indexed(source.path, num_words)
        test = None
        if source.test_path:
            _require_file(source.test_path)
            test = load_indexed(source.test_path, num_words)
    else:
        _require_file(source.path)
        docs, labels = load_text(source.path)
        vocab = build_vocabulary(docs, num_words)
        samples = [LabeledSample(featurize(d, vocab), y) for d, y in zip(docs, labels)]
        test = None
        if source.test_path:
            _require_file(source.test_path)
            tdocs, tlabels = load_text(source.test_path)
            test = [LabeledSample(featurize(d, vocab), y) for d, y in zip(tdocs, tlabels)]

    if test is not None:
        parts = split(samples, train_size, 0.0, seed)
        parts.test = test
        if not test:
            raise DataError("degenerate split")
        return parts
    if source.test_fraction <= 0:
        raise DataError("degenerate split")
    return split(samples, train_size, source.test_fraction, seed)
