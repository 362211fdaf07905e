import json
import math

import numpy as np
import pytest
from scipy import stats

from esfkit.coalescent import (
    k_from_defining_events,
    k_from_defining_events_batch,
    run_ima_replicate,
    simulate_ima,
    simulate_tree,
    t_mrcas_statistics,
    variance_t_mrcas,
)
from esfkit.esf import esf_distribution, k_distribution
from esfkit.eve import expected_eve_count, solve_eve_recurrence
from esfkit.gem import oldest_sample_count_distribution


def chisq_p(observed_counts, probs):
    obs = np.asarray(observed_counts, dtype=float)
    exp = np.asarray(probs, dtype=float)
    return stats.chisquare(obs, exp / exp.sum() * obs.sum()).pvalue


def test_tree_structure():
    events = simulate_tree(6, seed=3)
    assert len(events) == 5
    times = [e.time for e in events]
    assert times == sorted(times)
    assert events[-1].merged[0] | events[-1].merged[1] == frozenset(range(1, 7))
    with pytest.raises(ValueError):
        simulate_tree(1)


def test_tree_height_means():
    h2 = np.array([simulate_tree(2, s)[-1].time for s in range(20_000)])
    assert abs(h2.mean() - 1) < 3 * h2.std() / math.sqrt(h2.size)
    h3 = np.array([simulate_tree(3, s)[-1].time for s in range(20_000)])
    assert abs(h3.mean() - 4 / 3) < 3 * h3.std() / math.sqrt(h3.size)


def test_t_mrcas_statistics():
    s = t_mrcas_statistics(3, 100_000, seed=1)
    assert abs(s.mean - 4 / 3) < 3 * s.std_error
    assert abs(s.variance - 1 - 4 / 36) < 0.03
    assert math.isclose(variance_t_mrcas(3), 1 + 4 / 36)
    big = t_mrcas_statistics(100, 100_000, seed=2)
    assert abs(big.mean - 1.98) < 3 * big.std_error and big.expected_mean < 2
    assert big.histogram.sum() <= 100_000
    with pytest.raises(ValueError):
        t_mrcas_statistics(2, 10, seed=0)


def test_single_replicate_record():
    r = run_ima_replicate(5, 1, seed=12)
    assert r.partition.n == 5 and r.k == r.partition.k and r.defining_events == 5
    assert sum(r.age_counts) == 5 and r.age_counts[0] == r.x_n
    assert json.loads(r.to_json())["seed"] == [12]
    assert run_ima_replicate(5, 1, seed=12) == r
    one = run_ima_replicate(1, 2, seed=0)
    assert (one.k, one.x_n, one.y_n) == (1, 1, 1)


def test_batch_invariants():
    b = simulate_ima(7, 1.3, 20_000, seed=5)
    assert np.all(b.defining_events == 7)
    assert np.all((b.partitions * np.arange(1, 8)).sum(axis=1) == 7)
    assert np.all(b.partitions.sum(axis=1) == b.k)
    single = b.k == 1
    assert np.all(b.x_n[single] == 7) and np.all(b.y_n[single] == 7)
    assert np.all(b.y_n <= 7) and np.all(b.x_n >= 1)
    # when Eve's allele survives it is the oldest one
    alive = b.y_n > 0
    assert np.all(b.x_n[alive] == b.y_n[alive])


def test_coalescent_partition_law_n5():
    b = simulate_ima(5, 1, 100_000, seed=11)
    dist = esf_distribution(5, 1)
    keys = [p.counts for p in dist]
    index = {k: i for i, k in enumerate(keys)}
    counts = np.zeros(len(keys))
    for row in map(tuple, b.partitions):
        counts[index[row]] += 1
    assert chisq_p(counts, [float(v) for v in dist.values()]) > 1e-3
    kd = k_distribution(5, 1)
    assert chisq_p(np.bincount(b.k, minlength=6)[1:], [float(v) for v in kd.values()]) > 1e-3


def test_coalescent_n2():
    b = simulate_ima(2, 1, 100_000, seed=2)
    assert abs((b.k == 1).mean() - 0.5) < 0.005
    q = [float(v) for v in solve_eve_recurrence(2, 1).q]
    freq = np.bincount(b.y_n, minlength=3) / 1e5
    assert np.all(np.abs(freq - q) < 3 * np.sqrt(np.array(q) * (1 - np.array(q)) / 1e5))


@pytest.mark.parametrize("n", [2, 5, 10])
@pytest.mark.parametrize("theta", [0.5, 1, 2])
def test_mean_eve_count(n, theta):
    b = simulate_ima(n, theta, 20_000, seed=n * 10 + int(theta * 2))
    se = b.y_n.std(ddof=1) / math.sqrt(20_000)
    assert abs(b.y_n.mean() - float(expected_eve_count(n, theta))) < 3 * se


def test_oldest_count_matches_formula():
    b = simulate_ima(5, 1, 100_000, seed=21)
    probs = [float(v) for v in oldest_sample_count_distribution(5, 1).values()]
    assert chisq_p(np.bincount(b.x_n, minlength=6)[1:], probs) > 1e-3


def test_exchangeability_of_leaves():
    b = simulate_ima(6, 1, 50_000, seed=31)
    leaves = b.leaf_alleles
    for i, j in ((0, 1), (2, 5), (3, 4)):
        same = (leaves[:, i] == leaves[:, j]).mean()
        assert abs(same - 0.5) < 3 * math.sqrt(0.25 / 50_000)
    # a fixed relabelling of leaves leaves the partition unchanged
    perm = np.array([3, 0, 5, 1, 4, 2])
    rec = next(b.records())
    relabelled = np.asarray(rec.leaf_alleles)[perm]
    assert sorted(np.unique(relabelled, return_counts=True)[1]) == sorted(np.unique(rec.leaf_alleles, return_counts=True)[1])


def test_k_from_defining_events():
    assert all(k_from_defining_events(1, 3, s) == 1 for s in range(20))
    k2 = k_from_defining_events_batch(2, 1, 100_000, seed=3)
    assert abs((k2 == 1).mean() - 0.5) < 0.005
    k10 = k_from_defining_events_batch(10, 0.5, 100_000, seed=4)
    probs = [float(v) for v in k_distribution(10, 0.5).values()]
    expected = np.array(probs) * 1e5
    observed = np.bincount(k10, minlength=11)[1:]
    keep = expected >= 5
    tail_obs, tail_exp = observed[~keep].sum(), expected[~keep].sum()
    assert chisq_p(np.append(observed[keep], tail_obs), np.append(expected[keep], tail_exp)) > 1e-3
    assert k_from_defining_events(8, 1, 5) == k_from_defining_events(8, 1, 5)


def test_seed_determinism():
    a = simulate_ima(4, 2, 5000, seed=9)
    b = simulate_ima(4, 2, 5000, seed=9)
    assert np.array_equal(a.partitions, b.partitions) and np.array_equal(a.t_mrcas, b.t_mrcas)
    c = simulate_ima(4, 2, 5000, seed=10)
    assert not np.array_equal(a.t_mrcas, c.t_mrcas)
