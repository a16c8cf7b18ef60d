"""PageRank by dense power iteration.

Graphs here stay small enough (thousands of vertices) that a dense numpy
transition matrix beats sparse bookkeeping.  Dangling mass is redistributed
over the teleport distribution each step, so scores always sum to one.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptyGraphError

DEFAULT_DAMPING = 0.85
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200


def pagerank(nodes, edges, damping: float = DEFAULT_DAMPING,
             tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
             personalization: dict | None = None) -> dict:
    """Rank `nodes` from directed `edges` (iterable of (src, dst) pairs).

    Teleport is uniform unless a personalization weight map is given; the
    iteration stops when the L1 change drops below `tol`.  Returns a score
    per node summing to 1.
    """
    node_list = sorted(nodes)
    if not node_list:
        raise EmptyGraphError("pagerank on an empty vertex set")
    index = {node: i for i, node in enumerate(node_list)}
    n = len(node_list)

    out_neighbors: list[list[int]] = [[] for _ in range(n)]
    for src, dst in edges:
        if src in index and dst in index:
            out_neighbors[index[src]].append(index[dst])

    if personalization:
        teleport = np.zeros(n)
        for node, weight in personalization.items():
            if node in index and weight > 0:
                teleport[index[node]] = weight
        if teleport.sum() <= 0:
            teleport = np.full(n, 1.0 / n)
        else:
            teleport /= teleport.sum()
    else:
        teleport = np.full(n, 1.0 / n)

    transition = np.zeros((n, n))
    dangling = np.zeros(n, dtype=bool)
    for i, neighbors in enumerate(out_neighbors):
        if not neighbors:
            dangling[i] = True
            continue
        share = 1.0 / len(neighbors)
        for j in neighbors:
            transition[j, i] += share

    scores = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        dangling_mass = scores[dangling].sum()
        new_scores = (damping * (transition @ scores + dangling_mass * teleport)
                      + (1.0 - damping) * teleport)
        if np.abs(new_scores - scores).sum() < tol:
            scores = new_scores
            break
        scores = new_scores

    scores = scores / scores.sum()
    return {node: float(scores[index[node]]) for node in node_list}
