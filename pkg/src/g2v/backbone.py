"""Reference dynamic-graph encoder: mean of recent interaction messages
through a two-layer MLP, behind a plug-point registry so alternative node
encoders can substitute."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor
from .errors import NegativeDelta
from .temporal import NeighborIndex, TemporalGraph


@dataclass(frozen=True)
class TimeEncodingSpec:
    dT: int = 100

    def frequencies(self) -> np.ndarray:
        i = np.arange(1, self.dT + 1, dtype=np.float64)
        if self.dT == 1:
            return np.ones(1)
        return np.power(10.0, -4.0 * (i - 1) / (self.dT - 1))


def time_encode(delta_t: float, spec: TimeEncodingSpec) -> np.ndarray:
    """TE(dt)_i = cos(w_i * dt) with w_i log-spaced from 1 down to 1e-4."""
    if delta_t < 0:
        raise NegativeDelta(f"delta_t must be >= 0, got {delta_t}")
    return np.cos(spec.frequencies() * delta_t).astype(np.float32)


@dataclass
class BackboneConfig:
    d: int = 172           # node-state dimension
    d_hidden: int = 172
    m_recent: int = 20     # events aggregated per node
    time_spec: TimeEncodingSpec = field(default_factory=TimeEncodingSpec)


def message_dim(g: TemporalGraph, cfg: BackboneConfig) -> int:
    return g.d_V + g.d_E + cfg.time_spec.dT


def mean_message(x: int, t: float, g: TemporalGraph, idx: NeighborIndex,
                 cfg: BackboneConfig) -> np.ndarray:
    """Mean over the M most recent pre-t events of
    concat(neighbor feature, edge feature, time encoding of t - t')."""
    freqs = cfg.time_spec.frequencies()
    nbrs, ts, eids = idx.recent_events(x, t, cfg.m_recent)
    d_msg = message_dim(g, cfg)
    if len(nbrs) == 0:
        return np.zeros(d_msg, dtype=np.float64)
    acc = np.zeros(d_msg, dtype=np.float64)
    for j in range(len(nbrs)):
        parts = []
        if g.d_V:
            parts.append(g.node_feature(int(nbrs[j])).astype(np.float64))
        if g.d_E:
            parts.append(g.edge_feat[int(eids[j])].astype(np.float64))
        parts.append(np.cos(freqs * (t - float(ts[j]))))
        acc += np.concatenate(parts)
    return acc / len(nbrs)


def node_state_batch(msgs: np.ndarray, params: dict) -> Tensor:
    """(B, d_msg) mean messages -> (B, d) node states on the tape."""
    x = Tensor(msgs)
    h = (x @ params["backbone.W1"] + params["backbone.b1"]).relu()
    return h @ params["backbone.W2"] + params["backbone.b2"]


def node_state(x: int, t: float, g: TemporalGraph, idx: NeighborIndex,
               params: dict, cfg: BackboneConfig) -> np.ndarray:
    """Single-node forward; evaluation path (no gradients)."""
    msg = mean_message(x, t, g, idx, cfg)[None]
    return node_state_batch(msg, params).data[0]


# Plug-point: name -> callable(node, t, graph, index, params, cfg) -> vector
BACKBONE_REGISTRY = {}


def register_backbone(name: str, fn) -> None:
    BACKBONE_REGISTRY[name] = fn


register_backbone("mean-message", node_state)
