import math

import numpy as np
import pytest

import g2v.autodiff as autodiff
import g2v.trainer as trainer_mod
from g2v.autodiff import Tensor
from g2v.cache import EmbeddingCache
from g2v.config import RunConfig
from g2v.datagen import random_log, separable_log
from g2v.pipeline import build_model
from g2v.temporal import NeighborIndex, chronological_split
from g2v.trainer import TrainConfig, bce_loss, finite_diff_check, fit

SMALL_KW = dict(frames=4, height=32, width=32, recent_neighbors=4,
                d=16, d_hidden=16, d_vid=16, d_model=32, mlp_hidden=32,
                time_dim=8, m_recent=5)


def _setup(strategy="mlp", alpha=0.3, gate_mode="fixed", seed=0,
           n_events=300, n_nodes=30, **overrides):
    kw = dict(SMALL_KW)
    kw.update(overrides)
    cfg = RunConfig(fusion=strategy, alpha=alpha, gate_mode=gate_mode,
                    seed=seed, **kw)
    g = random_log(n_events, n_nodes, seed=seed + 2)
    idx = NeighborIndex(g)
    model = build_model(cfg, g)
    cache = EmbeddingCache(cfg.d_vid, 0)
    return cfg, g, idx, model, cache


def _batch(g, lo=100, hi=110):
    return [(int(g.src[i]), int(g.dst[i]), float(g.t[i]))
            for i in range(lo, hi)]


def test_bce_closed_forms():
    p = Tensor(np.array([[0.5]]))
    assert float(bce_loss(p, np.array([1.0])).data) == pytest.approx(math.log(2))
    p = Tensor(np.array([[1 - 1e-7]]))
    assert float(bce_loss(p, np.array([1.0])).data) == pytest.approx(1e-7)


def test_bce_batch_mean():
    probs = np.array([[0.9], [0.2], [0.6]])
    ys = np.array([1.0, 0.0, 1.0])
    hand = -(math.log(0.9) + math.log(0.8) + math.log(0.6)) / 3
    assert float(bce_loss(Tensor(probs), ys).data) == pytest.approx(hand)


def test_gradcheck_all_strategies():
    for strategy, gate in [("attention", "fixed"), ("attention", "learnable"),
                           ("bilinear", "fixed"), ("mlp", "fixed"),
                           ("none", "fixed")]:
        cfg, g, idx, model, cache = _setup(strategy, gate_mode=gate)
        err = finite_diff_check(model, g, idx, _batch(g), cache,
                                h=1e-3, sample=200, rng_seed=0)
        assert err <= 1e-4, f"{strategy}/{gate}: {err}"


def test_gradcheck_corrupted_gradient_fails(monkeypatch):
    orig = autodiff.Tensor.relu

    def bad_relu(self):
        out = orig(self)
        inner = out._backward
        out._backward = lambda grad: tuple(2.0 * x for x in inner(grad))
        return out

    monkeypatch.setattr(autodiff.Tensor, "relu", bad_relu)
    cfg, g, idx, model, cache = _setup("mlp")
    err = finite_diff_check(model, g, idx, _batch(g), cache,
                            h=1e-3, sample=200, rng_seed=0)
    assert err > 1e-2


def test_grad_scale_zero_freezes_video_branch():
    cfg, g, idx, model, cache = _setup("attention", alpha=0.3)
    split = chronological_split(g)
    before = {n: p.data.copy() for n, p in model.params.items()}
    tc = TrainConfig(lr=1e-3, video_lr=1e-3, grad_scale=0.0,
                     batch_size=50, max_epochs=2, patience=5, seed=0)
    model, _ = fit(g, idx, split, model, cache, tc)
    for n, p in model.params.items():
        if n.startswith("fusion."):
            assert np.array_equal(p.data, before[n]), n
        else:
            assert not np.array_equal(p.data, before[n]), n


def test_patience_stops_on_worsening_validation(monkeypatch):
    cfg, g, idx, model, cache = _setup("none")
    split = chronological_split(g)
    seq = iter([0.9, 0.8, 0.7, 0.6, 0.5])

    class FakeReport:
        def __init__(self, ap):
            self.ap_mean = ap

    monkeypatch.setattr(trainer_mod, "evaluate",
                        lambda *a, **k: FakeReport(next(seq)))
    tc = TrainConfig(lr=1e-4, batch_size=50, max_epochs=10, patience=1, seed=0)
    model, log = fit(g, idx, split, model, cache, tc)
    assert len(log) == 2  # epoch 1 is best, epoch 2 exhausts patience


def test_best_checkpoint_restored(monkeypatch):
    cfg, g, idx, model, cache = _setup("none")
    split = chronological_split(g)
    seq = iter([0.9, 0.1, 0.1, 0.1])
    snapshots = []

    class FakeReport:
        def __init__(self, ap):
            self.ap_mean = ap

    def fake_eval(*a, **k):
        snapshots.append({n: p.data.copy() for n, p in model.params.items()})
        return FakeReport(next(seq))

    monkeypatch.setattr(trainer_mod, "evaluate", fake_eval)
    tc = TrainConfig(lr=1e-3, batch_size=50, max_epochs=4, patience=2, seed=0)
    model, log = fit(g, idx, split, model, cache, tc)
    for n, p in model.params.items():
        assert np.array_equal(p.data, snapshots[0][n]), n


def test_separable_loss_decreases():
    g = separable_log(500, seed=5)
    idx = NeighborIndex(g)
    split = chronological_split(g, seed=0)
    cfg = RunConfig(frames=4, height=32, width=32, recent_neighbors=8,
                    d=32, d_hidden=32, d_vid=32, d_model=64, mlp_hidden=64,
                    time_dim=16, m_recent=10, fusion="mlp", alpha=0.5, seed=0)
    model = build_model(cfg, g)
    for n, p in model.params.items():
        if n.startswith("backbone."):
            p.data[...] = 0.0
            p.trainable = False
    cache = EmbeddingCache(cfg.d_vid, 0)
    tc = TrainConfig(lr=2e-3, video_lr=2e-3, batch_size=25, max_epochs=5,
                     patience=5, seed=0)
    model, log = fit(g, idx, split, model, cache, tc)
    losses = [r.train_loss for r in log]
    assert all(b < a for a, b in zip(losses, losses[1:]))
    assert losses[-1] < 0.3


def test_training_reproducible_for_fixed_seed():
    def run():
        cfg, g, idx, model, cache = _setup("mlp", seed=3, n_events=150)
        split = chronological_split(g)
        tc = TrainConfig(lr=1e-3, batch_size=50, max_epochs=2, patience=5,
                         seed=3)
        _, log = fit(g, idx, split, model, cache, tc)
        return [(r.train_loss, r.val_ap) for r in log]

    assert run() == run()


def test_video_lr_only_steps_video_branch():
    # a single optimizer step: gradients are computed before any update, so
    # non-video parameters move identically whatever video_lr is
    def run(video_lr):
        cfg, g, idx, model, cache = _setup("attention", alpha=0.3,
                                           n_events=150)
        split = chronological_split(g)
        tc = TrainConfig(lr=1e-3, video_lr=video_lr, batch_size=10**6,
                         max_epochs=1, patience=5, seed=0)
        model, _ = fit(g, idx, split, model, cache, tc)
        return model

    a = run(1e-3)
    b = run(1e-6)
    moved = []
    for n in a.params:
        same = np.array_equal(a.params[n].data, b.params[n].data)
        if n.startswith("fusion."):
            if not same:
                moved.append(n)
        else:
            assert same, n
    # Wq/Wk are excused: a one-token key/value makes their gradient zero
    assert "fusion.W_f" in moved and "fusion.ffn.W1" in moved


def test_video_lr_irrelevant_when_video_branch_frozen():
    # grad_scale=0 freezes the whole video branch, so the multi-epoch
    # trajectory of every parameter is invariant to video_lr
    def run(video_lr):
        cfg, g, idx, model, cache = _setup("attention", alpha=0.3,
                                           n_events=150)
        split = chronological_split(g)
        tc = TrainConfig(lr=1e-3, video_lr=video_lr, grad_scale=0.0,
                         batch_size=50, max_epochs=2, patience=5, seed=0)
        model, _ = fit(g, idx, split, model, cache, tc)
        return model

    a = run(1e-3)
    b = run(1e-6)
    for n in a.params:
        assert np.array_equal(a.params[n].data, b.params[n].data), n


def test_non_finite_loss_aborts():
    cfg, g, idx, model, cache = _setup("none", n_events=150)
    split = chronological_split(g)
    model.params["pred.b2"].data[...] = np.nan
    tc = TrainConfig(lr=1e-3, batch_size=50, max_epochs=1, patience=5, seed=0)
    with pytest.raises(trainer_mod.NonFiniteLoss):
        fit(g, idx, split, model, cache, tc)


def test_training_log_csv_shape():
    row = trainer_mod.TrainLogRow(3, 0.51234567, 0.75, 12.34)
    assert row.csv() == "3,0.512346,0.750000,12.3"
