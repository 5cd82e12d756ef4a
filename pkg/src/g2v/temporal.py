"""Event-log data model, ingestion, chronological splits, and recency-indexed
neighbor queries for continuous-time interaction graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InconsistentFeatureWidth,
    MalformedRow,
    NonMonotonicTimestamp,
    TooFewEvents,
)

# Node id reserved for layout placeholders; real nodes must not use it.
DUMMY_NODE = -1


@dataclass(frozen=True)
class Event:
    src: int
    dst: int
    t: float
    edge_feat: tuple = ()

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ValueError("event timestamp must be finite")
        if self.src < 0 or self.dst < 0:
            raise ValueError("node ids must be non-negative")


class TemporalGraph:
    """Immutable chronologically ordered interaction log.

    Columnar storage (numpy arrays) so splits, feature lookups, and index
    construction stay cheap at tens of thousands of events.
    """

    def __init__(self, src, dst, t, edge_feat=None, num_nodes=None, node_feat=None):
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.t = np.asarray(t, dtype=np.float64)
        n = len(self.src)
        if len(self.dst) != n or len(self.t) != n:
            raise ValueError("src/dst/t length mismatch")
        if n and np.any(np.diff(self.t) < 0):
            raise ValueError("events must be non-decreasing in t")
        if edge_feat is None:
            edge_feat = np.zeros((n, 0), dtype=np.float32)
        edge_feat = np.asarray(edge_feat, dtype=np.float32)
        if edge_feat.ndim != 2:
            # reshape(n, -1) is ambiguous for n == 0, so spell out that case
            edge_feat = edge_feat.reshape(n, -1) if n else edge_feat.reshape(0, 0)
        if edge_feat.shape[0] != n:
            raise ValueError("edge_feat rows must match event count")
        self.edge_feat = edge_feat
        max_id = int(max(self.src.max(), self.dst.max())) if n else -1
        self.num_nodes = int(num_nodes) if num_nodes is not None else max_id + 1
        if n and max_id >= self.num_nodes:
            raise ValueError("node id exceeds num_nodes")
        d_v = node_feat.shape[1] if node_feat is not None else 0
        self._node_feat = node_feat
        self.d_V = d_v
        self.d_E = self.edge_feat.shape[1]

    def __len__(self) -> int:
        return len(self.src)

    @property
    def num_events(self) -> int:
        return len(self.src)

    def node_feature(self, x: int) -> np.ndarray:
        if self._node_feat is None:
            return np.zeros(0, dtype=np.float32)
        return self._node_feat[x]

    def event(self, i: int) -> Event:
        return Event(int(self.src[i]), int(self.dst[i]), float(self.t[i]),
                     tuple(self.edge_feat[i].tolist()))

    def to_csv(self) -> str:
        """Canonical re-serialization of the event log."""
        d = self.d_E
        header = "src,dst,ts" + "".join(f",f{j}" for j in range(d))
        lines = [header]
        for i in range(len(self)):
            row = f"{int(self.src[i])},{int(self.dst[i])},{self.t[i]:.17g}"
            if d:
                row += "," + ",".join(f"{v:.9g}" for v in self.edge_feat[i])
            lines.append(row)
        return "\n".join(lines) + "\n"


def ingest_events(source, sort: bool = False, num_nodes=None) -> TemporalGraph:
    """Parse a `src,dst,ts[,f0,f1,...]` CSV byte/str stream into a TemporalGraph.

    Timestamps must be non-decreasing unless `sort` is set, in which case rows
    are stably reordered by timestamp.
    """
    if isinstance(source, (bytes, bytearray)):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MalformedRow(1, "empty input")
    header = [c.strip() for c in lines[0].split(",")]
    if header[:3] != ["src", "dst", "ts"]:
        raise MalformedRow(1, "header must start with src,dst,ts")
    width = len(header) - 3

    srcs, dsts, ts, feats = [], [], [], []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) < 3:
            raise MalformedRow(line_no, "fewer than 3 columns")
        try:
            u = int(cells[0])
            v = int(cells[1])
            tv = float(cells[2])
        except ValueError as exc:
            raise MalformedRow(line_no, str(exc)) from None
        if not math.isfinite(tv):
            raise MalformedRow(line_no, "non-finite timestamp")
        if u < 0 or v < 0:
            raise MalformedRow(line_no, "negative node id")
        fv = cells[3:]
        if len(fv) != width:
            raise InconsistentFeatureWidth(line_no, width, len(fv))
        try:
            fv = [float(x) for x in fv]
        except ValueError as exc:
            raise MalformedRow(line_no, str(exc)) from None
        if ts and tv < ts[-1] and not sort:
            raise NonMonotonicTimestamp(line_no)
        srcs.append(u)
        dsts.append(v)
        ts.append(tv)
        feats.append(fv)

    if sort and ts:
        order = np.argsort(np.asarray(ts), kind="stable")
        srcs = [srcs[i] for i in order]
        dsts = [dsts[i] for i in order]
        feats = [feats[i] for i in order]
        ts = [ts[i] for i in order]
    feat_arr = np.asarray(feats, dtype=np.float32).reshape(len(srcs), width)
    return TemporalGraph(srcs, dsts, ts, feat_arr, num_nodes=num_nodes)


@dataclass
class SplitSpec:
    train_end_idx: int
    val_end_idx: int
    new_node_set: frozenset
    seed: int
    # event indices retained for training after masking out interactions that
    # touch a held-out node
    train_indices: np.ndarray = field(default=None)

    def ranges(self, n: int):
        return (range(0, self.train_end_idx),
                range(self.train_end_idx, self.val_end_idx),
                range(self.val_end_idx, n))


def chronological_split(g: TemporalGraph, ratios=(0.70, 0.15, 0.15),
                        seed: int = 0, holdout_frac: float = 0.10) -> SplitSpec:
    """Index-based chronological split plus a seeded inductive node holdout.

    Held-out nodes are drawn from nodes appearing in val/test events; training
    events touching any held-out node are masked from `train_indices`.
    """
    n = len(g)
    if n < 10:
        raise TooFewEvents(f"need >= 10 events, got {n}")
    n_train = int(math.floor(ratios[0] * n))
    n_val = int(math.floor(ratios[1] * n))
    train_end = n_train
    val_end = n_train + n_val

    eval_nodes = np.unique(np.concatenate([g.src[train_end:], g.dst[train_end:]]))
    rng = np.random.default_rng([int(seed), 0x5E1EC7])
    k = int(math.floor(holdout_frac * len(eval_nodes)))
    held = rng.choice(eval_nodes, size=k, replace=False) if k else np.array([], dtype=np.int64)
    new_node_set = frozenset(int(x) for x in held)

    tr_src = g.src[:train_end]
    tr_dst = g.dst[:train_end]
    if new_node_set:
        held_arr = np.asarray(sorted(new_node_set), dtype=np.int64)
        mask = ~(np.isin(tr_src, held_arr) | np.isin(tr_dst, held_arr))
    else:
        mask = np.ones(train_end, dtype=bool)
    train_indices = np.nonzero(mask)[0]
    return SplitSpec(train_end, val_end, new_node_set, int(seed), train_indices)


class NeighborIndex:
    """Per-node time-sorted adjacency answering most-recent-neighbor queries.

    Each interaction (u, v, t) is indexed in both directions, so every node's
    list holds (t, neighbor, event_index) triples sorted ascending by t.
    """

    def __init__(self, g: TemporalGraph):
        self.graph = g
        n = g.num_nodes
        counts = np.zeros(n + 1, dtype=np.int64)
        np.add.at(counts, g.src + 1, 1)
        np.add.at(counts, g.dst + 1, 1)
        offsets = np.cumsum(counts)
        total = int(offsets[-1])
        nbr = np.empty(total, dtype=np.int64)
        tt = np.empty(total, dtype=np.float64)
        eid = np.empty(total, dtype=np.int64)
        cursor = offsets[:-1].copy()
        # events are already time-ordered, so appending preserves per-node
        # ascending t
        for i in range(len(g)):
            u, v, t = int(g.src[i]), int(g.dst[i]), float(g.t[i])
            c = cursor[u]
            nbr[c], tt[c], eid[c] = v, t, i
            cursor[u] += 1
            c = cursor[v]
            nbr[c], tt[c], eid[c] = u, t, i
            cursor[v] += 1
        self._off = offsets
        self._nbr = nbr
        self._t = tt
        self._eid = eid

    def _span(self, x: int):
        return int(self._off[x]), int(self._off[x + 1])

    def history(self, x: int, t: float):
        """All (neighbor, t', event_index) strictly before t, ascending in t'."""
        lo, hi = self._span(x)
        ts = self._t[lo:hi]
        cut = int(np.searchsorted(ts, t, side="left"))
        return self._nbr[lo:lo + cut], ts[:cut], self._eid[lo:lo + cut]

    def temporal_neighbors(self, x: int, t: float, k: int = 1, s: int = 16):
        """The <= s distinct 1-hop neighbors of x interacting strictly before t,
        most-recent-first; ties at equal time break toward the smaller node id.
        """
        if k != 1:
            raise NotImplementedError("only k=1 neighborhoods are supported")
        if s < 1:
            raise ValueError("s must be >= 1")
        nbrs, ts, _ = self.history(x, t)
        latest = {}
        for i in range(len(nbrs) - 1, -1, -1):
            v = int(nbrs[i])
            if v not in latest:
                latest[v] = float(ts[i])
        out = sorted(latest.items(), key=lambda kv: (-kv[1], kv[0]))
        return out[:s]

    def recent_events(self, x: int, t: float, m: int):
        """The last m (neighbor, t', event_index) entries strictly before t."""
        nbrs, ts, eids = self.history(x, t)
        if len(nbrs) > m:
            nbrs, ts, eids = nbrs[-m:], ts[-m:], eids[-m:]
        return nbrs, ts, eids

    def earliest_incident_time(self, u: int, v: int, t_star: float):
        """min event time strictly before t_star incident on u or v, or None."""
        best = None
        for x in (u, v):
            lo, hi = self._span(x)
            if hi > lo and self._t[lo] < t_star:
                best = self._t[lo] if best is None else min(best, self._t[lo])
        return float(best) if best is not None else None
