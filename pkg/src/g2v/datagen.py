"""Synthetic event-log generators used by the test suite and for bundled
sample data."""

from __future__ import annotations

import numpy as np

from .temporal import TemporalGraph


def random_log(n_events: int, n_nodes: int, seed: int = 0,
               d_e: int = 0) -> TemporalGraph:
    """Uniform random interactions with sorted random timestamps."""
    rng = np.random.default_rng(seed)
    src = rng.integers(0, n_nodes, size=n_events)
    dst = rng.integers(0, n_nodes, size=n_events)
    t = np.sort(rng.uniform(0, 1000.0, size=n_events))
    feat = rng.normal(size=(n_events, d_e)).astype(np.float32) if d_e else None
    return TemporalGraph(src, dst, t, feat)


def separable_log(n_events: int = 5000, n_hubs: int = 20,
                  universe: int = 2_000_000, seed: int = 0) -> TemporalGraph:
    """Pixel-separable construction: each event attaches a fresh source to a
    recurring hub, so positives' frames show the hub's star (many edges) while
    random negative destinations land on never-seen nodes (empty frames)."""
    rng = np.random.default_rng(seed)
    src = np.empty(n_events, dtype=np.int64)
    dst = np.empty(n_events, dtype=np.int64)
    for i in range(n_events):
        src[i] = n_hubs + i  # fresh source every event
        dst[i] = int(rng.integers(n_hubs))
    t = np.arange(1, n_events + 1, dtype=np.float64)
    return TemporalGraph(src, dst, t, num_nodes=universe)


def uci_like_log(n_events: int = 5000, n_nodes: int = 1899,
                 seed: int = 7) -> TemporalGraph:
    """Message-network-like slice: heavy-tailed activity with recency-biased
    partner reuse and bursty timestamps."""
    rng = np.random.default_rng(seed)
    # heavy-tailed node popularity
    pop = rng.pareto(1.2, size=n_nodes) + 1.0
    pop /= pop.sum()
    src = np.empty(n_events, dtype=np.int64)
    dst = np.empty(n_events, dtype=np.int64)
    t = np.empty(n_events, dtype=np.float64)
    clock = 0.0
    recent_pairs = []
    for i in range(n_events):
        clock += float(rng.exponential(30.0)) + (0.0 if rng.random() < 0.7
                                                 else float(rng.exponential(600.0)))
        t[i] = clock
        if recent_pairs and rng.random() < 0.45:
            u, v = recent_pairs[int(rng.integers(len(recent_pairs)))]
            if rng.random() < 0.5:
                u, v = v, u
        else:
            u = int(rng.choice(n_nodes, p=pop))
            v = int(rng.choice(n_nodes, p=pop))
            while v == u:
                v = int(rng.choice(n_nodes, p=pop))
        src[i], dst[i] = u, v
        recent_pairs.append((u, v))
        if len(recent_pairs) > 500:
            recent_pairs.pop(0)
    return TemporalGraph(src, dst, t, num_nodes=n_nodes)
