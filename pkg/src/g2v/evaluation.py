"""Evaluation protocol: three negative-sampling strategies, transductive and
inductive filtering, AP / AUC-ROC, and multi-seed aggregation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyEvalSet, NoPositives, SingleClass
from .pipeline import Model, score_pairs
from .temporal import NeighborIndex, SplitSpec, TemporalGraph

NSS_KINDS = ("rnd", "hist", "ind")


def average_precision(scores, labels) -> float:
    """Mean over positives of precision at each positive's rank, descending
    score order, ties kept in stable input order."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if not (labels == 1).any():
        raise NoPositives("average precision needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    y = (labels[order] == 1).astype(np.float64)
    tp = np.cumsum(y)
    ranks = np.arange(1, len(y) + 1, dtype=np.float64)
    precision_at = tp / ranks
    return float(precision_at[y == 1].mean())


def auc_roc(scores, labels) -> float:
    """Mann-Whitney statistic: fraction of (positive, negative) pairs ranked
    correctly, ties credited 0.5."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise SingleClass("AUC needs both classes")
    # average ranks over the combined sample
    combined = np.concatenate([pos, neg])
    order = np.argsort(combined, kind="stable")
    ranks = np.empty(len(combined), dtype=np.float64)
    ranks[order] = np.arange(1, len(combined) + 1)
    sorted_vals = combined[order]
    # tie groups share their average rank
    i = 0
    while i < len(sorted_vals):
        j = i
        while j + 1 < len(sorted_vals) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        if j > i:
            avg = (i + j + 2) / 2.0
            ranks[order[i:j + 1]] = avg
        i = j + 1
    r_pos = ranks[:len(pos)].sum()
    n_p, n_n = len(pos), len(neg)
    return float((r_pos - n_p * (n_p + 1) / 2.0) / (n_p * n_n))


@dataclass
class NegSamplerPools:
    """Precomputed pair pools for the hist/ind strategies."""
    num_nodes: int
    train_pairs: np.ndarray      # (n,2) distinct training pairs
    eval_only_pairs: np.ndarray  # (m,2) pairs seen only in val/test

    @classmethod
    def build(cls, g: TemporalGraph, split: SplitSpec) -> "NegSamplerPools":
        tr = np.stack([g.src[:split.train_end_idx],
                       g.dst[:split.train_end_idx]], axis=1)
        ev = np.stack([g.src[split.train_end_idx:],
                       g.dst[split.train_end_idx:]], axis=1)
        tr_unique = np.unique(tr, axis=0) if len(tr) else tr.reshape(0, 2)
        ev_unique = np.unique(ev, axis=0) if len(ev) else ev.reshape(0, 2)
        tr_set = {(int(a), int(b)) for a, b in tr_unique}
        only = [p for p in ev_unique if (int(p[0]), int(p[1])) not in tr_set]
        only = np.asarray(only, dtype=np.int64).reshape(-1, 2)
        return cls(g.num_nodes, tr_unique, only)


def sample_negatives(batch, kind: str, pools: NegSamplerPools,
                     rng: np.random.Generator):
    """One negative per positive. Returns (negatives, fallback_count).

    rnd: uniform destination excluding the true one. hist: a training-history
    pair other than the positive. ind: a pair seen only in val/test. Empty
    pools fall back to rnd and are counted.
    """
    negatives = []
    fallback = 0
    for u, v, t in batch:
        if kind == "rnd":
            negatives.append((u, _random_dst(u, v, pools, rng), t))
            continue
        pool = pools.train_pairs if kind == "hist" else pools.eval_only_pairs
        picked = None
        if len(pool):
            for _ in range(100):
                a, b = pool[int(rng.integers(len(pool)))]
                if (int(a), int(b)) != (int(u), int(v)):
                    picked = (int(a), int(b))
                    break
        if picked is None:
            fallback += 1
            negatives.append((u, _random_dst(u, v, pools, rng), t))
        else:
            negatives.append((picked[0], picked[1], t))
    return negatives, fallback


def _random_dst(u, v, pools: NegSamplerPools, rng: np.random.Generator) -> int:
    while True:
        cand = int(rng.integers(pools.num_nodes))
        if cand != v:
            return cand


@dataclass
class EvalReport:
    setting: str
    strategy: str
    seeds: list
    ap_per_seed: list
    auc_per_seed: list
    fallback_count: int = 0

    @property
    def ap_mean(self):
        return float(np.mean(self.ap_per_seed))

    @property
    def ap_std(self):
        return float(np.std(self.ap_per_seed))

    @property
    def auc_mean(self):
        return float(np.mean(self.auc_per_seed))

    @property
    def auc_std(self):
        return float(np.std(self.auc_per_seed))

    def to_dict(self) -> dict:
        return {
            "setting": self.setting,
            "strategy": self.strategy,
            "seeds": list(self.seeds),
            "ap": {"mean": self.ap_mean, "std": self.ap_std,
                   "per_seed": list(self.ap_per_seed)},
            "auc": {"mean": self.auc_mean, "std": self.auc_std,
                    "per_seed": list(self.auc_per_seed)},
            "fallback_count": self.fallback_count,
        }

    def csv_row(self) -> str:
        return (f"{self.setting},{self.strategy},{self.ap_mean:.6f},"
                f"{self.ap_std:.6f},{self.auc_mean:.6f},{self.auc_std:.6f},"
                f"{self.fallback_count}")

    CSV_HEADER = "setting,strategy,ap_mean,ap_std,auc_mean,auc_std,fallback_count"


def eval_positives(g: TemporalGraph, split: SplitSpec, setting: str,
                   segment: str = "test"):
    """Positive (u, v, t) queries for the requested split segment."""
    n = len(g)
    lo, hi = ((split.val_end_idx, n) if segment == "test"
              else (split.train_end_idx, split.val_end_idx))
    pairs = [(int(g.src[i]), int(g.dst[i]), float(g.t[i])) for i in range(lo, hi)]
    if setting == "inductive":
        held = split.new_node_set
        pairs = [p for p in pairs if p[0] in held or p[1] in held]
    if not pairs:
        raise EmptyEvalSet(f"no positives for setting={setting}, segment={segment}")
    return pairs


def evaluate(model: Model, g: TemporalGraph, idx: NeighborIndex,
             split: SplitSpec, setting: str, strategy: str,
             seeds=range(5), cache=None, segment: str = "test",
             batch_size: int = 200, threads: int = 1,
             scorer=None) -> EvalReport:
    """Score every positive and a sampled negative per seed; aggregate AP/AUC.

    `scorer(pairs) -> scores` overrides the model pipeline (testing hook).
    """
    positives = eval_positives(g, split, setting, segment)
    pools = NegSamplerPools.build(g, split)
    ap_seed, auc_seed = [], []
    fallback_total = 0
    for seed in seeds:
        scores, labels = [], []
        for b, lo in enumerate(range(0, len(positives), batch_size)):
            batch = positives[lo:lo + batch_size]
            rng = np.random.default_rng([int(seed), b, 0xE7A1])
            negs, fb = sample_negatives(batch, strategy, pools, rng)
            fallback_total += fb
            allpairs = batch + negs
            if scorer is not None:
                s = np.asarray(scorer(allpairs), dtype=np.float64)
            else:
                s = score_pairs(model, g, idx, allpairs, cache,
                                threads=threads, batch_size=batch_size)
            scores.append(s)
            labels.append(np.concatenate([np.ones(len(batch)),
                                          np.zeros(len(negs))]))
        sc = np.concatenate(scores)
        lb = np.concatenate(labels)
        ap_seed.append(average_precision(sc, lb))
        auc_seed.append(auc_roc(sc, lb))
    return EvalReport(setting, strategy, list(seeds), ap_seed, auc_seed,
                      fallback_total)
