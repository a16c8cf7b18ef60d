"""Skip-gram embeddings with negative sampling over walk sequences.

Trained by stochastic gradient ascent on the standard objective:
log sigmoid(u_ctx . v_center) plus the sum of log sigmoid(-u_neg . v_center)
over sampled negatives.  Updates run in shuffled mini-batches of pairs, with
a linearly decaying step size; everything is seeded and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_DIM = 128
DEFAULT_WINDOW = 5
DEFAULT_NEGATIVES = 5
DEFAULT_EPOCHS = 5
DEFAULT_LEARNING_RATE = 0.025
NOISE_POWER = 0.75


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60.0, 60.0)))


def pair_objective(center_vec, context_vec, negative_vecs) -> float:
    """Objective contribution of one (center, context, negatives) triple."""
    pos = float(np.log(sigmoid(context_vec @ center_vec)))
    neg = float(np.log(sigmoid(-(negative_vecs @ center_vec))).sum())
    return pos + neg


def pair_gradients(center_vec, context_vec, negative_vecs):
    """Analytic gradients of pair_objective w.r.t. each argument."""
    pos_sig = sigmoid(context_vec @ center_vec)
    neg_sig = sigmoid(negative_vecs @ center_vec)  # sigma(u_k . v)
    grad_center = ((1.0 - pos_sig) * context_vec
                   - (neg_sig[:, None] * negative_vecs).sum(axis=0))
    grad_context = (1.0 - pos_sig) * center_vec
    grad_negatives = -neg_sig[:, None] * center_vec[None, :]
    return grad_center, grad_context, grad_negatives


def skipgram_pairs(walks, index: dict, window: int):
    """(center, context) index pairs within `window` positions in any walk."""
    centers: list[int] = []
    contexts: list[int] = []
    for walk in walks:
        ids = [index[v] for v in walk]
        for i, center in enumerate(ids):
            lo = max(0, i - window)
            hi = min(len(ids), i + window + 1)
            for j in range(lo, hi):
                if j == i:
                    continue
                centers.append(center)
                contexts.append(ids[j])
    return (np.asarray(centers, dtype=np.int64),
            np.asarray(contexts, dtype=np.int64))


@dataclass
class EmbeddingModel:
    vectors: dict
    objective_history: list[float]

    def __getitem__(self, vertex):
        return self.vectors[vertex]


def train_embeddings(walks, dim: int = DEFAULT_DIM,
                     window: int = DEFAULT_WINDOW,
                     negatives: int = DEFAULT_NEGATIVES,
                     epochs: int = DEFAULT_EPOCHS,
                     learning_rate: float = DEFAULT_LEARNING_RATE,
                     seed: int = 0,
                     batch_size: int = 1024) -> EmbeddingModel:
    """Learn a vector per vertex appearing in `walks`.

    The noise distribution is proportional to vertex frequency^0.75.  The
    objective history holds the mean pair objective evaluated after every
    epoch on one fixed draw of negatives, so ascent is observable.
    """
    if not walks:
        raise ValueError("no walks to train on")
    vocab = sorted({v for walk in walks for v in walk})
    index = {v: i for i, v in enumerate(vocab)}
    n_vocab = len(vocab)

    counts = np.zeros(n_vocab)
    for walk in walks:
        for v in walk:
            counts[index[v]] += 1
    noise = counts ** NOISE_POWER
    noise /= noise.sum()

    centers, contexts = skipgram_pairs(walks, index, window)
    n_pairs = centers.size

    rng = np.random.default_rng(seed)
    in_vecs = (rng.random((n_vocab, dim)) - 0.5) / dim
    out_vecs = np.zeros((n_vocab, dim))

    if n_pairs == 0:
        # walks of length one only: vertices keep their initial vectors
        vectors = {v: in_vecs[index[v]].copy() for v in vocab}
        return EmbeddingModel(vectors=vectors, objective_history=[])

    eval_negatives = rng.choice(n_vocab, size=(n_pairs, negatives), p=noise)

    def full_objective() -> float:
        vc = in_vecs[centers]
        pos = np.log(sigmoid(np.einsum("bd,bd->b", out_vecs[contexts], vc)))
        neg_dot = np.einsum("bkd,bd->bk", out_vecs[eval_negatives], vc)
        neg = np.log(sigmoid(-neg_dot)).sum(axis=1)
        return float((pos + neg).mean())

    history: list[float] = []
    total_batches = epochs * ((n_pairs + batch_size - 1) // batch_size)
    batch_counter = 0
    for _ in range(epochs):
        order = rng.permutation(n_pairs)
        negs = rng.choice(n_vocab, size=(n_pairs, negatives), p=noise)
        for start in range(0, n_pairs, batch_size):
            sel = order[start:start + batch_size]
            c = centers[sel]
            o = contexts[sel]
            k = negs[sel]
            vc = in_vecs[c]
            uo = out_vecs[o]
            uk = out_vecs[k]
            pos_sig = sigmoid(np.einsum("bd,bd->b", uo, vc))
            neg_sig = sigmoid(np.einsum("bkd,bd->bk", uk, vc))
            g = 1.0 - pos_sig
            grad_vc = g[:, None] * uo - np.einsum("bk,bkd->bd", neg_sig, uk)
            grad_uo = g[:, None] * vc
            grad_uk = -neg_sig[:, :, None] * vc[:, None, :]
            # linear step-size decay over the full training run
            lr = learning_rate * max(1.0 - batch_counter / total_batches,
                                     1e-4)
            np.add.at(in_vecs, c, lr * grad_vc)
            np.add.at(out_vecs, o, lr * grad_uo)
            np.add.at(out_vecs, k.ravel(),
                      lr * grad_uk.reshape(-1, grad_uk.shape[-1]))
            batch_counter += 1
        history.append(full_objective())

    vectors = {v: in_vecs[index[v]].copy() for v in vocab}
    return EmbeddingModel(vectors=vectors, objective_history=history)
