import math

import numpy as np
import pytest

from g2v.datagen import random_log
from g2v.errors import BadMagic
from g2v.formats import read_gvf, write_gvf
from g2v.temporal import NeighborIndex, TemporalGraph, ingest_events
from g2v.video import (DUMMY_NODE, FrameSpec, build_graph_video, induce_frame,
                       induce_frames, render_frame, slice_window)

from conftest import graph_from_events

SMALL = FrameSpec(F=4, s=2, H=32, W=32)


def test_slice_window_uniform():
    assert slice_window(0.0, 10.0, 4) == [2.5, 5.0, 7.5, 10.0]


def test_slice_window_zero_length():
    assert slice_window(5.0, 5.0, 4) == [5.0, 5.0, 5.0, 5.0]


def test_slice_window_f16_last_is_endpoint():
    ts = slice_window(0.0, 16.0, 16)
    assert ts == [float(i) for i in range(1, 17)]
    assert ts[-1] == 16.0


def test_induce_frame_shared_neighbor_and_dummies():
    # neighbor 3 touched both endpoints; its more recent interaction is with
    # node 1, so it lands on the u side and the v side is left with dummies
    events = [(1, 2, 5.0), (1, 3, 8.0), (9, 3, 6.0)]
    g = graph_from_events(sorted(events, key=lambda e: e[2]), num_nodes=10)
    idx = NeighborIndex(g)
    fr = induce_frame(1, 9, 9.0, 20.0, SMALL, idx)
    assert set(fr.u_slots) == {3, 2}
    assert fr.v_slots == [DUMMY_NODE, DUMMY_NODE]
    assert fr.edges == [(1, 2, 5.0), (1, 3, 8.0), (3, 9, 6.0)]


def test_induce_frame_no_history():
    g = graph_from_events([(5, 6, 1.0)], num_nodes=10)
    idx = NeighborIndex(g)
    fr = induce_frame(1, 2, 0.5, 0.5, SMALL, idx)
    assert fr.u_slots == [DUMMY_NODE] * 2
    assert fr.v_slots == [DUMMY_NODE] * 2
    assert fr.edges == []


def test_induce_frame_excludes_event_at_t_star():
    g = graph_from_events([(1, 2, 10.0)], num_nodes=5)
    idx = NeighborIndex(g)
    fr = induce_frame(1, 2, 10.0, 10.0, SMALL, idx)
    assert fr.edges == []
    assert fr.u_slots == [DUMMY_NODE] * 2


def test_frame_edge_times_bounded():
    # every edge in frame i satisfies t_edge <= t_i and t_edge < t_star
    rng = np.random.default_rng(7)
    g = random_log(300, 20, seed=7)
    idx = NeighborIndex(g)
    for _ in range(100):
        u, v = int(rng.integers(20)), int(rng.integers(20))
        t_star = float(rng.uniform(g.t[10], g.t[-1]))
        _, frames = induce_frames(u, v, t_star, SMALL, idx)
        for fr in frames:
            for a, b, te in fr.edges:
                assert te <= fr.t_i and te < t_star


def test_slot_stability_across_frames():
    # a neighbor that stays in the top-s set keeps its slot index
    g = random_log(300, 12, seed=2)
    idx = NeighborIndex(g)
    spec = FrameSpec(F=8, s=4, H=32, W=32)
    rng = np.random.default_rng(1)
    checked = 0
    for _ in range(30):
        u, v = int(rng.integers(12)), int(rng.integers(12))
        t_star = float(rng.uniform(g.t[50], g.t[-1]))
        _, frames = induce_frames(u, v, t_star, spec, idx)
        for prev, cur in zip(frames, frames[1:]):
            for j, n in enumerate(prev.u_slots):
                if n != DUMMY_NODE and n in cur.u_slots:
                    assert cur.u_slots[j] == n
                    checked += 1
            for j, n in enumerate(prev.v_slots):
                if n != DUMMY_NODE and n in cur.v_slots:
                    assert cur.v_slots[j] == n
                    checked += 1
    assert checked > 50


def test_render_empty_frame_geometry():
    g = graph_from_events([(5, 6, 1.0)], num_nodes=10)
    idx = NeighborIndex(g)
    fr = induce_frame(1, 2, 0.5, 0.5, SMALL, idx)
    img = render_frame(fr, (0.0, 0.5), SMALL)
    h, w = SMALL.H, SMALL.W
    pal = SMALL.palette
    assert tuple(img[:, h // 2, w // 4]) == pal.endpoint
    assert tuple(img[:, h // 2, 3 * w // 4]) == pal.endpoint
    # corners are untouched background
    for y, x in [(0, 0), (0, w - 1), (h - 1, 0), (h - 1, w - 1)]:
        assert tuple(img[:, y, x]) == pal.background


def test_render_single_edge_segment_oracle():
    # the only edge is (u,v) at t0: its pixels carry colormap[0] and each
    # lies within 1.5 px of the ideal anchor-to-anchor segment
    g = graph_from_events([(1, 2, 10.0)], num_nodes=5)
    idx = NeighborIndex(g)
    spec = FrameSpec(F=4, s=2, H=64, W=64)
    fr = induce_frame(1, 2, 15.0, 20.0, spec, idx)
    assert fr.edges == [(1, 2, 10.0)]
    img = render_frame(fr, (10.0, 20.0), spec)
    c0 = tuple(spec.palette.edge_colormap[0])
    ys, xs = np.where((img[0] == c0[0]) & (img[1] == c0[1]) & (img[2] == c0[2]))
    assert len(ys) > 0
    (ux, uy), (vx, vy) = (spec.W // 4, spec.H // 2), (3 * spec.W // 4, spec.H // 2)
    for y, x in zip(ys, xs):
        # distance from (x, y) to the segment (ux,uy)-(vx,vy)
        px, py = float(x), float(y)
        dx, dy = vx - ux, vy - uy
        t = max(0.0, min(1.0, ((px - ux) * dx + (py - uy) * dy) /
                         (dx * dx + dy * dy)))
        dist = math.hypot(px - (ux + t * dx), py - (uy + t * dy))
        assert dist <= 1.5
    # midpoint of the segment is covered by the edge color
    assert tuple(img[:, (uy + vy) // 2, (ux + vx) // 2]) == c0


def test_render_deterministic():
    g = random_log(100, 10, seed=4)
    idx = NeighborIndex(g)
    fr = induce_frame(1, 2, float(g.t[60]), float(g.t[80]), SMALL, idx)
    a = render_frame(fr, (float(g.t[0]), float(g.t[80])), SMALL)
    b = render_frame(fr, (float(g.t[0]), float(g.t[80])), SMALL)
    assert np.array_equal(a, b)


def test_build_graph_video_shape_and_determinism():
    g = random_log(100, 10, seed=4)
    idx = NeighborIndex(g)
    spec = FrameSpec(F=16, s=16, H=64, W=64)
    v1 = build_graph_video(1, 2, float(g.t[-1]), spec, idx)
    v2 = build_graph_video(1, 2, float(g.t[-1]), spec, idx)
    assert v1.pixels.shape == (16, 3, 64, 64)
    assert v1.pixels.dtype == np.uint8
    assert np.array_equal(v1.pixels, v2.pixels)
    assert v1.key == v2.key


def test_build_graph_video_no_history_identical_frames():
    g = graph_from_events([(5, 6, 1.0)], num_nodes=10)
    idx = NeighborIndex(g)
    video = build_graph_video(1, 2, 0.5, SMALL, idx)
    for i in range(1, SMALL.F):
        assert np.array_equal(video.pixels[0], video.pixels[i])


def test_no_leakage_from_future_events():
    g = random_log(200, 12, seed=9)
    idx = NeighborIndex(g)
    t_star = float(g.t[149])
    before = build_graph_video(1, 2, t_star, SMALL, idx)
    # append events at t >= t_star (including one touching the endpoints)
    extra_src = np.concatenate([g.src[:150], np.array([1, 3])])
    extra_dst = np.concatenate([g.dst[:150], np.array([2, 4])])
    extra_t = np.concatenate([g.t[:150], np.array([t_star, t_star + 5.0])])
    g2 = TemporalGraph(extra_src, extra_dst, extra_t, num_nodes=g.num_nodes)
    after = build_graph_video(1, 2, t_star, SMALL, NeighborIndex(g2))
    assert np.array_equal(before.pixels, after.pixels)


def test_permutation_invariance():
    # permuting input rows of the same event multiset leaves pixels unchanged
    g = random_log(150, 10, seed=6)
    lines = g.to_csv().strip().split("\n")
    header, rows = lines[0], lines[1:]
    rng = np.random.default_rng(0)
    perm = rng.permutation(len(rows))
    shuffled = header + "\n" + "\n".join(rows[i] for i in perm) + "\n"
    g2 = ingest_events(shuffled, sort=True)
    t_star = float(g.t[-1])
    a = build_graph_video(1, 2, t_star, SMALL, NeighborIndex(g))
    b = build_graph_video(1, 2, t_star, SMALL, NeighborIndex(g2))
    assert np.array_equal(a.pixels, b.pixels)


def test_gvf_round_trip(tmp_path):
    g = random_log(100, 10, seed=4)
    idx = NeighborIndex(g)
    video = build_graph_video(3, 7, float(g.t[-1]), SMALL, idx)
    p = tmp_path / "x.gvf"
    write_gvf(p, video)
    back = read_gvf(p)
    assert back.key == video.key
    assert np.array_equal(back.pixels, video.pixels)
    # byte-for-byte stable writes
    p2 = tmp_path / "y.gvf"
    write_gvf(p2, video)
    assert p.read_bytes() == p2.read_bytes()


def test_gvf_bad_magic(tmp_path):
    p = tmp_path / "bad.gvf"
    p.write_bytes(b"NOPE" + b"\x00" * 60)
    with pytest.raises(BadMagic):
        read_gvf(p)


def test_frame_spec_validation():
    with pytest.raises(Exception):
        FrameSpec(F=0, s=2, H=32, W=32)
    with pytest.raises(Exception):
        FrameSpec(F=4, s=2, H=16, W=32)
    with pytest.raises(Exception):
        FrameSpec(F=4, s=0, H=32, W=32)


def test_config_hash_changes_with_spec():
    a = FrameSpec(F=4, s=2, H=32, W=32)
    b = FrameSpec(F=8, s=2, H=32, W=32)
    assert a.config_hash() != b.config_hash()
    assert a.config_hash() == FrameSpec(F=4, s=2, H=32, W=32).config_hash()
