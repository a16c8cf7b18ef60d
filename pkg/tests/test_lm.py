"""Dirichlet-smoothed language model scoring."""

import math

import numpy as np
import pytest

from femkit.lm import (
    CollectionStats,
    Document,
    likelihood_row,
    log_likelihood,
    mean_log_likelihood,
    softmax,
    tokenize,
)


def test_tokenize_lowercases_and_splits():
    assert tokenize("The Bayes' Theorem, 1970!") == ["the", "bayes",
                                                     "theorem", "1970"]


class TestDirichletHandCase:
    """Two-document toy collection: 'a b' and 'a c', mu = 1, query 'a'."""

    def setup_method(self):
        self.stats = CollectionStats.from_texts(["a b", "a c"])
        self.doc1 = Document.from_text("a b")
        self.doc2 = Document.from_text("a c")

    def test_collection_stats(self):
        assert self.stats.total_tokens == 4
        assert self.stats.vocabulary_size == 3
        assert self.stats.collection_probability("a") == 0.5

    def test_smoothed_value(self):
        # (1 + 1 * 0.5) / (2 + 1) = 0.5 for either document
        got = log_likelihood(["a"], self.doc1, self.stats, mu=1.0)
        assert got == pytest.approx(math.log(0.5), abs=1e-12)
        got2 = log_likelihood(["a"], self.doc2, self.stats, mu=1.0)
        assert got2 == pytest.approx(math.log(0.5), abs=1e-12)

    def test_query_b(self):
        # doc1: (1 + 0.25) / 3; doc2: (0 + 0.25) / 3
        got1 = log_likelihood(["b"], self.doc1, self.stats, mu=1.0)
        got2 = log_likelihood(["b"], self.doc2, self.stats, mu=1.0)
        assert got1 == pytest.approx(math.log(1.25 / 3), abs=1e-12)
        assert got2 == pytest.approx(math.log(0.25 / 3), abs=1e-12)

    def test_mu_zero_is_mle(self):
        got = log_likelihood(["a"], self.doc1, self.stats, mu=0.0)
        assert got == pytest.approx(math.log(0.5), abs=1e-12)
        # token absent from the document: likelihood exactly zero
        assert log_likelihood(["c"], self.doc1, self.stats, mu=0.0) == float(
            "-inf")

    def test_unseen_token_floor(self):
        # unseen anywhere: floor 1/(total + vocabulary) = 1/7
        assert self.stats.collection_probability("zzz") == pytest.approx(
            1 / 7)


def test_mean_log_likelihood_divides_by_query_length():
    stats = CollectionStats.from_texts(["a a b"])
    doc = Document.from_text("a a b")
    single = log_likelihood(["a"], doc, stats, mu=2.0)
    double = mean_log_likelihood(["a", "a"], doc, stats, mu=2.0)
    assert double == pytest.approx(single, abs=1e-12)


class TestSoftmax:
    def test_sums_to_one(self):
        row = softmax([-5.0, -6.0, -7.0])
        assert row.sum() == pytest.approx(1.0, abs=1e-12)
        assert row[0] > row[1] > row[2]

    def test_inf_maps_to_zero(self):
        row = softmax([-1.0, float("-inf")])
        assert row[1] == 0.0
        assert row[0] == pytest.approx(1.0)

    def test_all_inf_is_uniform(self):
        row = softmax([float("-inf")] * 4)
        np.testing.assert_allclose(row, 0.25)


def test_identical_context_gets_max_of_row():
    contexts = ["gradient descent update rule", "prior posterior likelihood",
                "matrix factorization loss"]
    stats = CollectionStats.from_texts(contexts)
    docs = [Document.from_text(c) for c in contexts]
    query = tokenize("gradient descent update rule")
    row = likelihood_row(query, docs, stats, mu=100.0)
    assert row.argmax() == 0
    assert row.sum() == pytest.approx(1.0, abs=1e-12)
