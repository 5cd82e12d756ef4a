"""Supervised training: BCE + Adam with a separate learning rate and gradient
scaling for the video branch, validation-based early stopping, and a central
finite-difference gradient checker."""

from __future__ import annotations

import copy
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor
from .errors import NonFiniteLoss
from .evaluation import NegSamplerPools, _random_dst, average_precision, evaluate
from .fusion import video_branch_param_names
from .pipeline import Model, forward_pairs
from .temporal import NeighborIndex, SplitSpec, TemporalGraph


def bce_loss(p: Tensor, y: np.ndarray) -> Tensor:
    """Mean binary cross-entropy; p is a (B,1) probability tensor."""
    y = np.asarray(y, dtype=np.float64).reshape(p.shape)
    yt = Tensor(y)
    one = Tensor(np.ones_like(y))
    loss = -(yt * p.log() + (one - yt) * (one - p).log())
    return loss.mean()


@dataclass
class TrainConfig:
    lr: float = 1e-4
    video_lr: float = 1e-4
    grad_scale: float = 1.0
    batch_size: int = 200
    max_epochs: int = 100
    patience: int = 20
    seed: int = 0
    threads: int = 1
    val_strategy: str = "rnd"
    val_seed: int = 0


class Adam:
    def __init__(self, beta1=0.9, beta2=0.999, eps=1e-8):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {}
        self.v = {}
        self.t = 0

    def step(self, params: dict, lrs: dict) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name, p in params.items():
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            m = self.m.get(name)
            if m is None:
                m = np.zeros_like(p.data)
                self.v[name] = np.zeros_like(p.data)
            v = self.v[name]
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            self.m[name], self.v[name] = m, v
            mhat = m / (1 - b1 ** self.t)
            vhat = v / (1 - b2 ** self.t)
            p.data = p.data - lrs[name] * mhat / (np.sqrt(vhat) + self.eps)


def _zero_grads(params: dict) -> None:
    for p in params.values():
        p.grad = None


def _training_batches(g: TemporalGraph, split: SplitSpec, batch_size: int):
    idxs = split.train_indices
    for lo in range(0, len(idxs), batch_size):
        chunk = idxs[lo:lo + batch_size]
        yield [(int(g.src[i]), int(g.dst[i]), float(g.t[i])) for i in chunk]


def planned_pairs(g: TemporalGraph, split: SplitSpec, cfg: TrainConfig):
    """Every (u, v, t) query a fit() run with this config can issue.

    Batching, negative sampling, and per-epoch RNG streams are all seeded, so
    the full query set is known up front. External encoders use this to
    pre-compute embeddings for an entire run (render the pairs, encode them,
    then train with the imported file). Early stopping only ever shrinks the
    realized set, so this is a superset for shorter runs.
    """
    from .evaluation import eval_positives, sample_negatives

    pools = NegSamplerPools.build(g, split)
    seen, out = set(), []

    def add(p):
        if p not in seen:
            seen.add(p)
            out.append(p)

    for epoch in range(1, cfg.max_epochs + 1):
        for b, batch in enumerate(_training_batches(g, split, cfg.batch_size)):
            rng = np.random.default_rng([cfg.seed, epoch, b, 0x7123])
            for u, v, t in batch:
                add((u, v, t))
                add((u, _random_dst(u, v, pools, rng), t))
    positives = eval_positives(g, split, "transductive", "val")
    for b, lo in enumerate(range(0, len(positives), cfg.batch_size)):
        batch = positives[lo:lo + cfg.batch_size]
        rng = np.random.default_rng([int(cfg.val_seed), b, 0xE7A1])
        negs, _ = sample_negatives(batch, cfg.val_strategy, pools, rng)
        for p in batch + negs:
            add(p)
    return out


@dataclass
class TrainLogRow:
    epoch: int
    train_loss: float
    val_ap: float
    elapsed_ms: float

    def csv(self) -> str:
        return f"{self.epoch},{self.train_loss:.6f},{self.val_ap:.6f},{self.elapsed_ms:.1f}"


def fit(g: TemporalGraph, idx: NeighborIndex, split: SplitSpec, model: Model,
        cache, cfg: TrainConfig):
    """Train in chronological batches with one seeded random negative per
    positive; returns (best model, list of TrainLogRow)."""
    pools = NegSamplerPools.build(g, split)
    video_names = set(video_branch_param_names(model.params))
    lrs = {n: (cfg.video_lr if n in video_names else cfg.lr)
           for n in model.params}
    opt = Adam()
    log = []
    best_ap = -math.inf
    best_params = None
    stale = 0
    for epoch in range(1, cfg.max_epochs + 1):
        tic = time.perf_counter()
        losses = []
        for b, batch in enumerate(_training_batches(g, split, cfg.batch_size)):
            rng = np.random.default_rng([cfg.seed, epoch, b, 0x7123])
            negs = [(u, _random_dst(u, v, pools, rng), t) for u, v, t in batch]
            pairs = batch + negs
            labels = np.concatenate([np.ones(len(batch)), np.zeros(len(negs))])
            _zero_grads(model.params)
            p = forward_pairs(model, g, idx, pairs, cache, cfg.threads)
            loss = bce_loss(p, labels)
            lv = float(loss.data)
            if not math.isfinite(lv):
                raise NonFiniteLoss(
                    f"epoch {epoch} batch {b}: loss={lv}, "
                    f"first pairs {pairs[:3]}")
            loss.backward()
            if cfg.grad_scale != 1.0:
                for n in video_names:
                    gr = model.params[n].grad
                    if gr is not None:
                        model.params[n].grad = gr * cfg.grad_scale
            opt.step(model.params, lrs)
            losses.append(lv)
        val = evaluate(model, g, idx, split, "transductive", cfg.val_strategy,
                       seeds=[cfg.val_seed], cache=cache, segment="val",
                       batch_size=cfg.batch_size, threads=cfg.threads)
        row = TrainLogRow(epoch, float(np.mean(losses)), val.ap_mean,
                          (time.perf_counter() - tic) * 1000.0)
        log.append(row)
        if row.val_ap > best_ap:
            best_ap = row.val_ap
            best_params = {n: p.data.copy() for n, p in model.params.items()}
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    if best_params is not None:
        for n, p in model.params.items():
            p.data = best_params[n]
    return model, log


def finite_diff_check(model: Model, g: TemporalGraph, idx: NeighborIndex,
                      batch, cache, h: float = 1e-3, sample: int = 200,
                      rng_seed: int = 0) -> float:
    """Max relative error between tape gradients and central differences over
    a random sample of parameter entries."""
    labels = np.concatenate([np.ones(len(batch) // 2),
                             np.zeros(len(batch) - len(batch) // 2)])

    def loss_value() -> float:
        p = forward_pairs(model, g, idx, batch, cache)
        return float(bce_loss(p, labels).data)

    _zero_grads(model.params)
    p = forward_pairs(model, g, idx, batch, cache)
    loss = bce_loss(p, labels)
    loss.backward()
    grads = {n: (t.grad if t.grad is not None else np.zeros_like(t.data))
             for n, t in model.params.items()}

    entries = []
    for n, t in model.params.items():
        for flat in range(t.data.size):
            entries.append((n, flat))
    rng = np.random.default_rng(rng_seed)
    if len(entries) > sample:
        pick = rng.choice(len(entries), size=sample, replace=False)
        entries = [entries[i] for i in pick]

    def probe(name, flat, step):
        """Central, left and right difference quotients at +-step."""
        t = model.params[name]
        orig = t.data.flat[flat]
        mid = loss_value()
        t.data.flat[flat] = orig + step
        up = loss_value()
        t.data.flat[flat] = orig - step
        dn = loss_value()
        t.data.flat[flat] = orig
        return ((up - dn) / (2 * step), (mid - dn) / step, (up - mid) / step)

    def rel_err(fd, an):
        denom = max(abs(fd), abs(an))
        return 0.0 if denom < 1e-12 else abs(fd - an) / denom

    max_rel = 0.0
    for name, flat in entries:
        an = grads[name].flat[flat]
        central, left, right = probe(name, flat, h)
        rel = rel_err(central, an)
        if rel > 1e-4:
            # The loss is piecewise smooth (ReLU, clamp). When a kink sits
            # inside the +-h stencil the central difference is meaningless;
            # the tape gradient is still correct if it matches a one-sided
            # derivative at a smaller step. A wrong gradient matches neither.
            central, left, right = probe(name, flat, h / 32.0)
            rel = min(rel_err(central, an), rel_err(left, an),
                      rel_err(right, an))
        max_rel = max(max_rel, rel)
    return max_rel
