"""Query-likelihood scoring with Dirichlet-smoothed language models.

One collection-level statistics object is shared by every scorer built over
the same context corpus.  Log-likelihoods accumulate in log space; candidate
rows are normalized with a numerically safe softmax.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

DEFAULT_MU = 2000.0

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass
class Document:
    """Token counts for one scored document."""

    counts: Counter
    length: int

    @classmethod
    def from_text(cls, text: str) -> "Document":
        tokens = tokenize(text)
        return cls(counts=Counter(tokens), length=len(tokens))

    @classmethod
    def from_tokens(cls, tokens: list[str]) -> "Document":
        return cls(counts=Counter(tokens), length=len(tokens))


@dataclass
class CollectionStats:
    """Corpus-wide term statistics backing the smoothing distribution."""

    term_counts: Counter
    total_tokens: int
    vocabulary_size: int

    @classmethod
    def from_texts(cls, texts) -> "CollectionStats":
        counts: Counter = Counter()
        for text in texts:
            counts.update(tokenize(text))
        return cls(term_counts=counts, total_tokens=sum(counts.values()),
                   vocabulary_size=len(counts))

    def collection_probability(self, token: str) -> float:
        count = self.term_counts.get(token, 0)
        if count:
            return count / self.total_tokens
        # floor for tokens unseen anywhere in the collection
        return 1.0 / (self.total_tokens + self.vocabulary_size)


def log_likelihood(query_tokens, doc: Document, stats: CollectionStats,
                   mu: float = DEFAULT_MU) -> float:
    """Sum of per-token smoothed log probabilities of the query under doc.

    With mu = 0 this degenerates to the maximum-likelihood estimate, where a
    query token absent from the document drives the result to -inf.
    """
    denom = doc.length + mu
    if denom <= 0:
        return float("-inf")
    total = 0.0
    for token in query_tokens:
        p = (doc.counts.get(token, 0) +
             mu * stats.collection_probability(token)) / denom
        if p <= 0.0:
            return float("-inf")
        total += math.log(p)
    return total


def mean_log_likelihood(query_tokens, doc: Document, stats: CollectionStats,
                        mu: float = DEFAULT_MU) -> float:
    """Per-token average log likelihood; length bias removed on the query
    side, which matters when different-length texts are compared as queries
    against one model."""
    if not query_tokens:
        return float("-inf")
    return log_likelihood(query_tokens, doc, stats, mu) / len(query_tokens)


def softmax(log_scores) -> np.ndarray:
    """Exponent-normalize log scores into a distribution.

    -inf entries map to probability 0; if every entry is -inf the result is
    uniform (no evidence distinguishes the candidates).
    """
    arr = np.asarray(log_scores, dtype=np.float64)
    if arr.size == 0:
        return arr
    finite = np.isfinite(arr)
    if not finite.any():
        return np.full(arr.shape, 1.0 / arr.size)
    shifted = arr - arr[finite].max()
    weights = np.where(finite, np.exp(shifted, where=finite,
                                      out=np.zeros_like(shifted)), 0.0)
    return weights / weights.sum()


def likelihood_row(query_tokens, documents, stats: CollectionStats,
                   mu: float = DEFAULT_MU) -> np.ndarray:
    """Normalized likelihoods of one query against a row of candidate
    documents (uniform prior over candidates)."""
    logs = [log_likelihood(query_tokens, doc, stats, mu) for doc in documents]
    return softmax(logs)
