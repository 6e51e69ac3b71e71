"""Mistake-driven perceptron over sparse binary bag-of-words features."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_index_set, check_index_sets, check_labels, indices_to_csr

__all__ = ["LabeledSample", "SparsePerceptron", "evaluate"]


@dataclass(frozen=True)
class LabeledSample:
    """One review: sorted distinct feature indices and a 0/1 sentiment label."""

    features: tuple
    label: int

    @classmethod
    def make(cls, features: Iterable[int], label: int) -> "LabeledSample":
        return cls(tuple(sorted({int(i) for i in features})), int(label))

    def flipped(self) -> "LabeledSample":
        return LabeledSample(self.features, 1 - self.label)


class SparsePerceptron(ClassifierMixin, BaseEstimator):
    """Single-layer perceptron with a sign activation and unit learning rate.

    Predicts 1 when ``intercept_ + sum(coef_[features]) > 0`` and 0 otherwise,
    so the zero model (and any exact tie) predicts 0.

    Parameters
    ----------
    num_words : int
        Number of binary features; every index must lie in ``[0, num_words)``.
    max_epochs : int, default=50
        Upper bound on passes over the data in :meth:`fit`. Fitting stops
        early after the first epoch without mistakes.
    random_state : int, default=0
        Seed for the per-epoch visiting order used by :meth:`fit`.

    Attributes
    ----------
    coef_ : ndarray of shape (num_words,)
    intercept_ : float
    n_epochs_ : int
        Epochs actually run by the last call to :meth:`fit`.
    """

    def __init__(self, num_words=1000, max_epochs=50, random_state=0):
        self.num_words = num_words
        self.max_epochs = max_epochs
        self.random_state = random_state

    def _init_weights(self):
        if self.num_words < 1:
            raise ValueError("num_words must be >= 1")
        self.coef_ = np.zeros(self.num_words, dtype=np.float64)
        self.intercept_ = 0.0
        self.classes_ = np.array([0, 1])

    def _ensure_init(self):
        if not hasattr(self, "coef_"):
            self._init_weights()

    # single-sample API used by the simulator

    def score_one(self, features: Sequence[int]) -> float:
        check_is_fitted(self, "coef_")
        idx = check_index_set(features, self.num_words)
        return float(self.intercept_ + self.coef_[idx].sum())

    def predict_one(self, features: Sequence[int]) -> int:
        return 1 if self.score_one(features) > 0 else 0

    def update(self, features: Sequence[int], label: int) -> "SparsePerceptron":
        """Apply one Rosenblatt step in place; returns ``self``."""
        self._ensure_init()
        idx = check_index_set(features, self.num_words)
        if label not in (0, 1):
            raise ValueError("labels must be 0 or 1")
        predicted = 1 if self.intercept_ + self.coef_[idx].sum() > 0 else 0
        delta = label - predicted
        if delta:
            self.coef_[idx] += delta
            self.intercept_ += delta
        return self

    # batch estimator API

    def fit(self, X, y):
        """Train from the zero model with shuffled epochs until an epoch has no mistakes."""
        sets = check_index_sets(X, self.num_words)
        y = check_labels(y, len(sets))
        if not sets:
            raise ValueError("empty training set")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        self._init_weights()
        rng = np.random.default_rng(self.random_state)
        coef = self.coef_
        bias = 0.0
        self.n_epochs_ = 0
        for _ in range(self.max_epochs):
            self.n_epochs_ += 1
            mistakes = 0
            for i in rng.permutation(len(sets)):
                idx = sets[i]
                predicted = 1 if bias + coef[idx].sum() > 0 else 0
                delta = y[i] - predicted
                if delta:
                    coef[idx] += delta
                    bias += delta
                    mistakes += 1
            if mistakes == 0:
                break
        self.intercept_ = bias
        return self

    def partial_fit(self, X, y, classes=None):
        """One online pass over ``X`` in the given order."""
        sets = check_index_sets(X, self.num_words)
        y = check_labels(y, len(sets))
        self._ensure_init()
        for idx, label in zip(sets, y):
            self.update(idx, int(label))
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        mat = indices_to_csr(check_index_sets(X, self.num_words), self.num_words)
        return mat @ self.coef_ + self.intercept_

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(np.int64)

    # serialization

    def to_dict(self) -> dict:
        check_is_fitted(self, "coef_")
        nz = np.flatnonzero(self.coef_)
        return {
            "num_words": int(self.num_words),
            "bias": float(self.intercept_),
            "weights": [[int(i), float(self.coef_[i])] for i in nz],
        }

    @classmethod
    def from_dict(cls, doc: dict, **params) -> "SparsePerceptron":
        model = cls(num_words=int(doc["num_words"]), **params)
        model._init_weights()
        for i, v in doc["weights"]:
            model.coef_[int(i)] = float(v)
        model.intercept_ = float(doc["bias"])
        return model


def evaluate(model: SparsePerceptron, samples: Sequence[LabeledSample]) -> float:
    """Percentage of ``samples`` whose label the model predicts correctly."""
    if len(samples) == 0:
        raise ValueError("empty evaluation set")
    predicted = model.predict([s.features for s in samples])
    labels = np.fromiter((s.label for s in samples), dtype=np.int64, count=len(samples))
    return 100.0 * float(np.count_nonzero(predicted == labels)) / len(samples)
