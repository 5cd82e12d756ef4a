import itertools

import numpy as np
import pytest
from scipy import stats

from g2v.datagen import random_log
from g2v.errors import EmptyEvalSet, NoPositives, SingleClass
from g2v.evaluation import (NegSamplerPools, auc_roc, average_precision,
                            eval_positives, evaluate, sample_negatives)
from g2v.temporal import NeighborIndex, chronological_split


def test_ap_examples():
    assert average_precision([0.9, 0.8], [1, 0]) == 1.0
    assert abs(average_precision([0.9, 0.8, 0.1], [1, 0, 1]) - 5 / 6) < 1e-12
    assert average_precision([0.9, 0.1], [0, 1]) == 0.5


def test_auc_examples():
    assert auc_roc([0.9, 0.8, 0.1], [1, 1, 0]) == 1.0
    assert auc_roc([0.9, 0.8, 0.1], [1, 0, 1]) == 0.5
    assert auc_roc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]) == 0.5


def test_ap_requires_positive():
    with pytest.raises(NoPositives):
        average_precision([0.5, 0.5], [0, 0])


def test_auc_requires_both_classes():
    with pytest.raises(SingleClass):
        auc_roc([0.5, 0.4], [1, 1])


def test_metrics_exhaustive_small_cases():
    # every labeling with >= 1 positive (and for AUC >= 1 negative) of n <= 10
    from conftest import brute_force_ap, brute_force_auc
    rng = np.random.default_rng(0)
    for n in range(1, 11):
        scores = list(rng.uniform(size=n))
        scores[0] = scores[-1]  # force at least one potential tie
        for labels in itertools.product([0, 1], repeat=n):
            if sum(labels) == 0:
                continue
            assert abs(average_precision(scores, list(labels)) -
                       brute_force_ap(scores, list(labels))) <= 1e-9
            if sum(labels) < n:
                assert abs(auc_roc(scores, list(labels)) -
                           brute_force_auc(scores, list(labels))) <= 1e-9


def test_metrics_random_large_cases():
    from conftest import brute_force_ap, brute_force_auc
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(2, 201))
        scores = rng.choice(rng.uniform(size=max(2, n // 3)), size=n)
        labels = rng.integers(0, 2, size=n)
        if labels.sum() == 0:
            labels[0] = 1
        if labels.sum() == n:
            labels[-1] = 0
        s, l = list(scores), list(labels)
        assert abs(average_precision(s, l) - brute_force_ap(s, l)) <= 1e-9
        assert abs(auc_roc(s, l) - brute_force_auc(s, l)) <= 1e-9


def _pools_and_split(seed=0):
    g = random_log(400, 25, seed=seed)
    split = chronological_split(g, seed=seed)
    return g, split, NegSamplerPools.build(g, split)


def test_hist_negatives_subset_of_training_pairs():
    g, split, pools = _pools_and_split()
    train_set = {(int(a), int(b)) for a, b in pools.train_pairs}
    batch = eval_positives(g, split, "transductive")[:100]
    negs, fb = sample_negatives(batch, "hist", pools,
                                np.random.default_rng(0))
    assert fb == 0
    for u, v, _ in negs:
        assert (u, v) in train_set


def test_ind_negatives_disjoint_from_training_pairs():
    g, split, pools = _pools_and_split(seed=2)
    train_set = {(int(a), int(b)) for a, b in pools.train_pairs}
    batch = eval_positives(g, split, "transductive")[:100]
    negs, fb = sample_negatives(batch, "ind", pools,
                                np.random.default_rng(0))
    assert fb == 0
    for u, v, _ in negs:
        assert (u, v) not in train_set


def test_rnd_uniformity_chi_square():
    g, split, pools = _pools_and_split()
    n_nodes = 50
    pools.num_nodes = n_nodes
    rng = np.random.default_rng(3)
    batch = [(0, 1, 5.0)] * 100000
    negs, _ = sample_negatives(batch, "rnd", pools, rng)
    counts = np.bincount([v for _, v, _ in negs], minlength=n_nodes)
    assert counts[1] == 0  # the true destination is excluded
    expected = len(batch) / (n_nodes - 1)
    observed = np.delete(counts, 1)
    chi2 = stats.chisquare(observed, f_exp=expected)
    assert chi2.pvalue > 0.001


def test_fallback_flag_iff_pool_empty():
    g, split, pools = _pools_and_split()
    batch = eval_positives(g, split, "transductive")[:10]
    empty = NegSamplerPools(pools.num_nodes,
                            pools.train_pairs[:0], pools.eval_only_pairs[:0])
    negs, fb = sample_negatives(batch, "hist", empty,
                                np.random.default_rng(0))
    assert fb == len(batch)
    negs, fb = sample_negatives(batch, "ind", empty,
                                np.random.default_rng(0))
    assert fb == len(batch)
    _, fb = sample_negatives(batch, "hist", pools, np.random.default_rng(0))
    assert fb == 0


def test_negatives_deterministic_per_seed():
    g, split, pools = _pools_and_split()
    batch = eval_positives(g, split, "transductive")[:50]
    a, _ = sample_negatives(batch, "rnd", pools, np.random.default_rng([7, 1]))
    b, _ = sample_negatives(batch, "rnd", pools, np.random.default_rng([7, 1]))
    assert a == b


def test_evaluate_oracle_scorer_is_perfect():
    g, split, _ = _pools_and_split()
    idx = NeighborIndex(g)
    positives = set(eval_positives(g, split, "transductive"))
    rep = evaluate(None, g, idx, split, "transductive", "rnd",
                   seeds=[0, 1], scorer=lambda ps: [1.0 if p in positives
                                                    else 0.0 for p in ps])
    assert rep.ap_per_seed == [1.0, 1.0]
    assert rep.auc_per_seed == [1.0, 1.0]


def test_evaluate_constant_scorer_auc_half():
    g, split, _ = _pools_and_split()
    idx = NeighborIndex(g)
    rep = evaluate(None, g, idx, split, "transductive", "rnd",
                   seeds=[0], scorer=lambda ps: [0.5] * len(ps))
    assert rep.auc_per_seed == [0.5]


def test_evaluate_aggregation_matches_hand_computation():
    g, split, _ = _pools_and_split()
    idx = NeighborIndex(g)
    rng_scores = np.random.default_rng(5)

    def noisy(ps):
        return list(rng_scores.uniform(size=len(ps)))

    rep = evaluate(None, g, idx, split, "transductive", "rnd",
                   seeds=range(5), scorer=noisy)
    assert len(rep.ap_per_seed) == 5
    assert rep.ap_mean == pytest.approx(float(np.mean(rep.ap_per_seed)))
    assert rep.ap_std == pytest.approx(float(np.std(rep.ap_per_seed)))
    assert rep.auc_std == pytest.approx(float(np.std(rep.auc_per_seed)))
    d = rep.to_dict()
    assert d["ap"]["per_seed"] == rep.ap_per_seed
    assert 0.0 <= rep.ap_mean <= 1.0 and 0.0 <= rep.auc_mean <= 1.0


def test_inductive_positives_touch_holdout():
    g, split, _ = _pools_and_split(seed=4)
    pos = eval_positives(g, split, "inductive")
    assert pos
    for u, v, _ in pos:
        assert u in split.new_node_set or v in split.new_node_set


def test_empty_eval_set_raised():
    g, split, _ = _pools_and_split()
    empty_split = type(split)(split.train_end_idx, split.val_end_idx,
                              frozenset([10**9]), split.seed,
                              split.train_indices)
    with pytest.raises(EmptyEvalSet):
        eval_positives(g, empty_split, "inductive")
