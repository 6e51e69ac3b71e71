import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.pipeline import make_pipeline

from cmlsim.data import BagOfWordsVocabulary, synthesize
from cmlsim.model import LabeledSample, SparsePerceptron, evaluate


def fresh(num_words=10):
    m = SparsePerceptron(num_words)
    m._init_weights()
    return m


def dense_reference(num_words, sequence):
    """Perceptron over explicit 0/1 vectors, written without the sparse code path."""
    w = [0] * num_words
    b = 0
    for features, label in sequence:
        x = [0] * num_words
        for i in features:
            x[i] = 1
        score = b + sum(wi * xi for wi, xi in zip(w, x))
        yhat = 1 if score > 0 else 0
        d = label - yhat
        if d != 0:
            w = [wi + d * xi for wi, xi in zip(w, x)]
            b += d
    return w, b


class TestPredict:
    def test_zero_model_predicts_zero(self):
        assert fresh().predict_one([0, 4, 7]) == 0

    def test_positive_score(self):
        m = fresh()
        m.coef_[3] = 2
        m.intercept_ = -1
        assert m.predict_one([3]) == 1

    def test_tie_predicts_zero(self):
        m = fresh()
        m.coef_[3] = 1
        m.intercept_ = -1
        assert m.score_one([3]) == 0
        assert m.predict_one([3]) == 0

    def test_out_of_range(self):
        with pytest.raises(ValueError, match="feature out of range"):
            fresh(5).predict_one([5])

    def test_empty_features_depend_only_on_bias(self):
        m = fresh()
        m.coef_[:] = np.arange(10)
        for bias, expected in [(-1, 0), (0, 0), (0.5, 1)]:
            m.intercept_ = bias
            assert m.predict_one([]) == expected


class TestUpdate:
    def test_mistake_on_positive(self):
        m = fresh().update([1, 3], 1)
        assert m.coef_[1] == m.coef_[3] == 1
        assert m.intercept_ == 1
        assert np.count_nonzero(m.coef_) == 2

    def test_correct_prediction_is_noop(self):
        m = fresh().update([1, 3], 1)
        before = (m.coef_.copy(), m.intercept_)
        m.update([1, 3], 1)
        assert np.array_equal(m.coef_, before[0]) and m.intercept_ == before[1]

    def test_mistake_on_negative(self):
        m = fresh()
        m.coef_[1] = 1
        m.intercept_ = 1
        m.update([1], 0)
        assert m.coef_[1] == 0 and m.intercept_ == 0

    def test_bad_label(self):
        with pytest.raises(ValueError):
            fresh().update([1], 2)


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_online_updates_match_dense_reference(data):
    num_words = data.draw(st.integers(1, 50))
    sample = st.tuples(
        st.frozensets(st.integers(0, num_words - 1), max_size=num_words).map(sorted),
        st.integers(0, 1),
    )
    sequence = data.draw(st.lists(sample, max_size=200))
    m = fresh(num_words)
    for features, label in sequence:
        m.update(features, label)
    w, b = dense_reference(num_words, sequence)
    assert m.coef_.tolist() == w
    assert m.intercept_ == b
    # integer arithmetic throughout
    assert all(float(v).is_integer() for v in m.coef_)


class TestFit:
    def test_single_sample(self):
        m = SparsePerceptron(3, max_epochs=1).fit([[0]], [1])
        assert m.coef_[0] == 1 and m.intercept_ == 1

    def test_empty(self):
        with pytest.raises(ValueError, match="empty training set"):
            SparsePerceptron(3).fit([], [])

    def test_separable_converges(self):
        data = synthesize(600, 40, seed=4)
        X, y = [s.features for s in data], [s.label for s in data]
        m = SparsePerceptron(40, max_epochs=50, random_state=1).fit(X, y)
        assert m.n_epochs_ <= 50
        assert evaluate(m, data) == 100.0

    def test_deterministic(self):
        data = synthesize(300, 30, seed=2)
        X, y = [s.features for s in data], [s.label for s in data]
        a = SparsePerceptron(30, random_state=5).fit(X, y)
        b = SparsePerceptron(30, random_state=5).fit(X, y)
        assert a.coef_.tobytes() == b.coef_.tobytes() and a.intercept_ == b.intercept_

    def test_stops_after_clean_epoch(self):
        m = SparsePerceptron(3, max_epochs=50).fit([[0], [1]], [1, 0])
        assert m.n_epochs_ < 50
        assert m.predict([[0], [1]]).tolist() == [1, 0]


class TestEvaluate:
    def test_all_ones_on_balanced_set(self):
        m = fresh(4)
        m.intercept_ = 1.0
        data = [LabeledSample((i,), i % 2) for i in range(4)]
        assert evaluate(m, data) == 50.0

    def test_fit_then_evaluate_single(self):
        s = LabeledSample((2,), 1)
        m = SparsePerceptron(4).fit([s.features], [s.label])
        assert evaluate(m, [s]) == 100.0

    def test_empty(self):
        with pytest.raises(ValueError, match="empty evaluation set"):
            evaluate(fresh(), [])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.frozensets(st.integers(0, 9)), st.integers(0, 1)), min_size=1, max_size=30),
           st.lists(st.integers(-3, 3), min_size=11, max_size=11))
    def test_range(self, pairs, params):
        m = fresh(10)
        m.coef_[:] = params[:10]
        m.intercept_ = params[10]
        acc = evaluate(m, [LabeledSample.make(f, y) for f, y in pairs])
        assert 0.0 <= acc <= 100.0


class TestEstimatorApi:
    def test_params_roundtrip(self):
        m = SparsePerceptron(num_words=12, max_epochs=7, random_state=3)
        assert m.get_params() == {"num_words": 12, "max_epochs": 7, "random_state": 3}
        c = clone(m)
        assert c.get_params() == m.get_params() and not hasattr(c, "coef_")

    def test_dense_and_sparse_inputs_agree(self):
        import scipy.sparse as sp

        data = synthesize(200, 20, seed=8)
        X = [s.features for s in data]
        y = [s.label for s in data]
        dense = np.zeros((len(X), 20))
        for r, f in enumerate(X):
            dense[r, list(f)] = 1
        a = SparsePerceptron(20).fit(X, y)
        b = SparsePerceptron(20).fit(dense, y)
        c = SparsePerceptron(20).fit(sp.csr_matrix(dense), y)
        assert np.array_equal(a.coef_, b.coef_) and np.array_equal(a.coef_, c.coef_)
        assert a.score(X, y) == pytest.approx(evaluate(a, data) / 100)

    def test_partial_fit_equals_updates(self):
        data = synthesize(100, 16, seed=1)
        a = SparsePerceptron(16).partial_fit([s.features for s in data], [s.label for s in data])
        b = fresh(16)
        for s in data:
            b.update(s.features, s.label)
        assert np.array_equal(a.coef_, b.coef_) and a.intercept_ == b.intercept_

    def test_pipeline_with_vocabulary(self):
        docs = ["good great fine", "bad awful poor", "great good", "awful bad"] * 3
        labels = [1, 0, 1, 0] * 3
        pipe = make_pipeline(BagOfWordsVocabulary(num_words=6), SparsePerceptron(num_words=6))
        pipe.fit(docs, labels)
        assert pipe.predict(["good great", "poor awful"]).tolist() == [1, 0]

    def test_json_snapshot(self):
        m = fresh(6).update([1, 4], 1)
        doc = json.loads(json.dumps(m.to_dict()))
        assert doc == {"num_words": 6, "bias": 1.0, "weights": [[1, 1.0], [4, 1.0]]}
        back = SparsePerceptron.from_dict(doc)
        assert np.array_equal(back.coef_, m.coef_) and back.intercept_ == m.intercept_
