"""Input checks shared by the estimators.

Feature input ``X`` is accepted either as a sequence of index collections
(the native sparse form) or as a 2-D array / scipy sparse matrix whose
nonzero columns are taken as the active features.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def check_index_set(features, num_words: int) -> np.ndarray:
    idx = np.unique(np.asarray(features, dtype=np.int64).reshape(-1))
    if idx.size and (idx.max() >= num_words or idx.min() < 0):
        raise ValueError("feature out of range")
    return idx


def check_index_sets(X, num_words: int) -> list:
    """Return ``X`` as a list of int64 index arrays, each validated against ``num_words``."""
    if sp.issparse(X):
        X = sp.csr_matrix(X)
        if X.shape[1] > num_words:
            raise ValueError("feature out of range")
        X.eliminate_zeros()
        return [X.indices[X.indptr[r]:X.indptr[r + 1]].astype(np.int64) for r in range(X.shape[0])]
    if isinstance(X, np.ndarray) and X.ndim == 2 and X.dtype != object:
        if X.shape[1] > num_words:
            raise ValueError("feature out of range")
        return [np.flatnonzero(row) for row in X]
    return [check_index_set(row, num_words) for row in X]


def check_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64).reshape(-1)
    if y.shape[0] != n:
        raise ValueError(f"X has {n} samples but y has {y.shape[0]}")
    if y.size and not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    return y


def indices_to_csr(sets, num_words: int) -> sp.csr_matrix:
    """Binary CSR matrix with one row per index set; duplicate indices collapse to 1."""
    indptr = np.zeros(len(sets) + 1, dtype=np.int64)
    cols = []
    for r, idx in enumerate(sets):
        u = np.unique(idx)
        cols.append(u)
        indptr[r + 1] = indptr[r] + u.size
    indices = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    data = np.ones(indices.size, dtype=np.float64)
    return sp.csr_matrix((data, indices, indptr), shape=(len(sets), num_words))
