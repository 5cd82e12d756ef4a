"""Graph-video construction: temporal slicing of a link's history, per-frame
subgraph induction with stable neighbor slots, and deterministic rasterization
into an F x 3 x H x W uint8 tensor."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .raster import draw_disk, draw_line, draw_ring
from .temporal import DUMMY_NODE, NeighborIndex

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_U64 = (1 << 64) - 1

# guards the colormap index for zero-length windows
WINDOW_EPS = 1e-9


def fnv1a64(data) -> int:
    """FNV-1a 64-bit hash of a string or bytes."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _U64
    return h


def _default_colormap() -> np.ndarray:
    """256 RGB entries from deep blue (old edges) to warm yellow (recent)."""
    t = np.arange(256, dtype=np.float64) / 255.0
    lo = np.array([40.0, 60.0, 200.0])
    hi = np.array([255.0, 220.0, 40.0])
    table = np.rint(lo[None, :] * (1 - t[:, None]) + hi[None, :] * t[:, None])
    return table.astype(np.uint8)


@dataclass(frozen=True)
class ColorSpec:
    background: tuple = (0, 0, 0)
    endpoint: tuple = (255, 0, 0)
    neighbor_u: tuple = (0, 128, 255)
    neighbor_v: tuple = (0, 220, 120)
    dummy: tuple = (96, 96, 96)
    name: str = "default"
    edge_colormap: np.ndarray = field(default_factory=_default_colormap,
                                      compare=False, repr=False)


@dataclass(frozen=True)
class FrameSpec:
    F: int = 16
    k: int = 1
    s: int = 16
    H: int = 64
    W: int = 64
    palette: ColorSpec = field(default_factory=ColorSpec)

    def __post_init__(self):
        if self.F < 1:
            raise ValueError("F must be >= 1")
        if self.H < 32 or self.W < 32:
            raise ValueError("H and W must be >= 32")
        if self.s < 1:
            raise ValueError("s must be >= 1")
        if self.k != 1:
            raise ValueError("only k=1 is supported")

    def canonical(self) -> str:
        return (f"F={self.F},k={self.k},s={self.s},H={self.H},W={self.W},"
                f"palette={self.palette.name}")

    def config_hash(self) -> int:
        return fnv1a64(self.canonical())


@dataclass
class SubgraphFrame:
    """One temporal snapshot of the link-centered subgraph.

    u_slots / v_slots have exactly s entries each; DUMMY_NODE marks an
    unfilled slot. Edges are (a, b, t_edge) with a < b, deduplicated to the
    latest interaction per pair.
    """
    t_i: float
    u: int
    v: int
    u_slots: list
    v_slots: list
    edges: list

    def real_nodes(self):
        out = {self.u, self.v}
        out.update(x for x in self.u_slots if x != DUMMY_NODE)
        out.update(x for x in self.v_slots if x != DUMMY_NODE)
        return out


@dataclass(frozen=True)
class GraphVideo:
    key: tuple  # (u, v, t_star, config_hash)
    pixels: np.ndarray  # uint8 [F][3][H][W]


def slice_window(t0: float, t_star: float, F: int):
    """F uniform segment endpoints of [t0, t_star]; the last equals t_star."""
    if t0 > t_star:
        raise ValueError("t0 must be <= t_star")
    step = (t_star - t0) / F
    ts = [t0 + i * step for i in range(1, F + 1)]
    ts[-1] = t_star
    return ts


def _side_neighbors(idx: NeighborIndex, x: int, other: int, t_i: float, s: int):
    """Top-s most recent neighbors of x at t_i, excluding the two endpoints."""
    raw = idx.temporal_neighbors(x, t_i, 1, s + 2)
    return [(n, tl) for n, tl in raw if n != x and n != other][:s]


def _assign_slots(prev: list, current_nodes: list, s: int):
    """Stable slot assignment: survivors keep their slot, newcomers (in
    recency order) take the lowest free slot index."""
    cur = set(current_nodes)
    slots = [n if n in cur else DUMMY_NODE for n in prev]
    placed = {n for n in slots if n != DUMMY_NODE}
    free = [i for i, n in enumerate(slots) if n == DUMMY_NODE]
    fi = 0
    for n in current_nodes:
        if n in placed:
            continue
        slots[free[fi]] = n
        fi += 1
    return slots


def induce_frame(u: int, v: int, t_i: float, t_star: float, spec: FrameSpec,
                 idx: NeighborIndex, prev_u_slots=None, prev_v_slots=None) -> SubgraphFrame:
    """Induce the subgraph frame at time t_i for the query (u, v, t_star).

    A neighbor shared by both endpoints is assigned to the side with the more
    recent interaction (tie: u-side). Edges are all interactions among frame
    nodes with t <= t_i and t < t_star, deduplicated to the latest per pair.
    """
    s = spec.s
    nbr_u = _side_neighbors(idx, u, v, t_i, s)
    nbr_v = _side_neighbors(idx, v, u, t_i, s)
    tu = dict(nbr_u)
    tv = dict(nbr_v)
    shared = set(tu) & set(tv)
    for n in shared:
        if tv[n] > tu[n]:
            del tu[n]
        else:
            del tv[n]
    u_nodes = [n for n, _ in nbr_u if n in tu]
    v_nodes = [n for n, _ in nbr_v if n in tv]

    u_slots = _assign_slots(prev_u_slots or [DUMMY_NODE] * s, u_nodes, s)
    v_slots = _assign_slots(prev_v_slots or [DUMMY_NODE] * s, v_nodes, s)

    nodes = {u, v} | set(u_nodes) | set(v_nodes)
    pairs = {}
    for x in nodes:
        nbrs, ts, _ = idx.history(x, min(t_star, np.nextafter(t_i, math.inf)))
        for j in range(len(nbrs)):
            n = int(nbrs[j])
            te = float(ts[j])
            if te > t_i or n not in nodes:
                continue
            key = (min(x, n), max(x, n))
            if key[0] == key[1]:
                continue
            if key not in pairs or te > pairs[key]:
                pairs[key] = te
    edges = sorted((a, b, te) for (a, b), te in pairs.items())
    return SubgraphFrame(t_i, u, v, u_slots, v_slots, edges)


def _anchors(spec: FrameSpec):
    h, w = spec.H, spec.W
    return (w // 4, h // 2), (3 * w // 4, h // 2)


def _slot_positions(spec: FrameSpec):
    """Slot anchors: a vertical arc bulging left of the u endpoint and right
    of the v endpoint."""
    h, w = spec.H, spec.W
    (ux, uy), (vx, vy) = _anchors(spec)
    radius = min(h, w) * 0.22
    s = spec.s
    upos, vpos = [], []
    for j in range(s):
        theta = math.pi / 2 + math.pi * (j + 0.5) / s
        upos.append((int(ux + radius * math.cos(theta)),
                     int(uy + radius * math.sin(theta))))
        theta = math.pi / 2 - math.pi * (j + 0.5) / s
        vpos.append((int(vx + radius * math.cos(theta)),
                     int(vy + radius * math.sin(theta))))
    return upos, vpos


def render_frame(frame: SubgraphFrame, window, spec: FrameSpec) -> np.ndarray:
    """Rasterize a frame to a 3 x H x W uint8 tensor.

    Painter's order: background, edges (oldest first), dummy rings, neighbor
    disks, endpoint disks.
    """
    t0, t_star = window
    pal = spec.palette
    img = np.empty((spec.H, spec.W, 3), dtype=np.uint8)
    img[:] = np.asarray(pal.background, dtype=np.uint8)

    (ux, uy), (vx, vy) = _anchors(spec)
    upos, vpos = _slot_positions(spec)
    pos = {frame.u: (ux, uy), frame.v: (vx, vy)}
    for j, n in enumerate(frame.u_slots):
        if n != DUMMY_NODE:
            pos[n] = upos[j]
    for j, n in enumerate(frame.v_slots):
        if n != DUMMY_NODE:
            pos[n] = vpos[j]

    span = max(t_star - t0, WINDOW_EPS)
    for a, b, te in sorted(frame.edges, key=lambda e: (e[2], e[0], e[1])):
        ci = int(math.floor(255.0 * (te - t0) / span))
        ci = min(max(ci, 0), 255)
        (xa, ya), (xb, yb) = pos[a], pos[b]
        draw_line(img, xa, ya, xb, yb, pal.edge_colormap[ci], width=3)

    r_end = spec.H // 16
    r_nbr = max(1, spec.H // 24)
    for j, n in enumerate(frame.u_slots):
        if n == DUMMY_NODE:
            draw_ring(img, upos[j][0], upos[j][1], r_nbr, pal.dummy)
    for j, n in enumerate(frame.v_slots):
        if n == DUMMY_NODE:
            draw_ring(img, vpos[j][0], vpos[j][1], r_nbr, pal.dummy)
    for j, n in enumerate(frame.u_slots):
        if n != DUMMY_NODE:
            draw_disk(img, upos[j][0], upos[j][1], r_nbr, pal.neighbor_u)
    for j, n in enumerate(frame.v_slots):
        if n != DUMMY_NODE:
            draw_disk(img, vpos[j][0], vpos[j][1], r_nbr, pal.neighbor_v)
    draw_disk(img, ux, uy, r_end, pal.endpoint)
    draw_disk(img, vx, vy, r_end, pal.endpoint)
    return np.ascontiguousarray(img.transpose(2, 0, 1))


def empty_frame(u: int, v: int, t_i: float, spec: FrameSpec) -> SubgraphFrame:
    s = spec.s
    return SubgraphFrame(t_i, u, v, [DUMMY_NODE] * s, [DUMMY_NODE] * s, [])


def induce_frames(u: int, v: int, t_star: float, spec: FrameSpec,
                  idx: NeighborIndex):
    """Frame sequence for a query, threading slot assignments for stability."""
    t0 = idx.earliest_incident_time(u, v, t_star)
    if t0 is None:
        return None, [empty_frame(u, v, t_star, spec) for _ in range(spec.F)]
    frames = []
    pu = pv = None
    for t_i in slice_window(t0, t_star, spec.F):
        fr = induce_frame(u, v, t_i, t_star, spec, idx, pu, pv)
        pu, pv = fr.u_slots, fr.v_slots
        frames.append(fr)
    return t0, frames


def build_graph_video(u: int, v: int, t_star: float, spec: FrameSpec,
                      idx: NeighborIndex) -> GraphVideo:
    """Render the full graph video for (u, v, t_star)."""
    t0, frames = induce_frames(u, v, t_star, spec, idx)
    window = (t0 if t0 is not None else t_star, t_star)
    pixels = np.empty((spec.F, 3, spec.H, spec.W), dtype=np.uint8)
    if t0 is None:
        frame_px = render_frame(frames[0], window, spec)
        pixels[:] = frame_px[None]
    else:
        for i, fr in enumerate(frames):
            pixels[i] = render_frame(fr, window, spec)
    return GraphVideo((u, v, t_star, spec.config_hash()), pixels)
