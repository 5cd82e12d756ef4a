"""Shared fixtures and brute-force oracle helpers."""

import numpy as np
import pytest

from g2v.temporal import TemporalGraph


def graph_from_events(events, num_nodes=None):
    """Build a TemporalGraph from (src, dst, t) tuples."""
    src = np.array([e[0] for e in events], dtype=np.int64)
    dst = np.array([e[1] for e in events], dtype=np.int64)
    t = np.array([e[2] for e in events], dtype=np.float64)
    return TemporalGraph(src, dst, t, num_nodes=num_nodes)


def brute_force_neighbors(events, x, t, s):
    """Independent scan oracle: latest interaction per distinct neighbor
    strictly before t, most-recent-first, ties toward the smaller id."""
    latest = {}
    for u, v, te in events:
        if te >= t:
            continue
        if u == x and (v not in latest or te > latest[v]):
            latest[v] = te
        if v == x and (u not in latest or te > latest[u]):
            latest[u] = te
    out = sorted(latest.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(n, float(tl)) for n, tl in out[:s]]


def brute_force_ap(scores, labels):
    """Average precision straight from the definition: stable descending
    sort, mean precision at each positive's rank."""
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    hits = 0
    precisions = []
    for rank, i in enumerate(order, start=1):
        if labels[i] == 1:
            hits += 1
            precisions.append(hits / rank)
    return sum(precisions) / len(precisions)


def brute_force_auc(scores, labels):
    """Mann-Whitney pair-count oracle with 0.5 credit for ties."""
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                total += 1.0
            elif p == n:
                total += 0.5
    return total / (len(pos) * len(neg))


@pytest.fixture
def tiny_events():
    return [(1, 2, 10.0), (1, 3, 20.0), (1, 4, 30.0)]
