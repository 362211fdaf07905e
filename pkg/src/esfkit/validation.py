"""End-to-end cross-checks of every simulator against the exact formulas.

Each ``criterion_*`` function returns a :class:`CriterionResult`; ``run_all``
runs them in order.  Monte Carlo checks use chi-square tests at the 0.1%
level or three-standard-error bands.
"""
from __future__ import annotations

import itertools
import math
import time
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np
from scipy import stats

from . import combinatorics, eve, finite, gem, order_stats
from .coalescent import simulate_ima, t_mrcas_statistics
from .esf import (
    AllelicPartition,
    as_theta,
    check_consistency_recursion,
    check_noninterference,
    esf_distribution,
    esf_probability,
    k_distribution,
    partitions,
)

ALPHA = 1e-3
TABLE_THETAS = ("0.1", "0.2", "0.5", "1", "2", "5", "10", "20")
TABLE_MOST_FREQUENT = (0.936, 0.882, 0.758, 0.624, 0.476, 0.297, 0.195, 0.122)


class CriterionResult(NamedTuple):
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:>2} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _chisquare(observed: dict, expected: dict) -> float:
    keys = list(expected)
    obs = np.array([observed.get(k, 0) for k in keys], dtype=float)
    if sum(observed.values()) != obs.sum():
        return 0.0  # mass on an outcome with zero probability
    exp = np.array([float(expected[k]) for k in keys])
    return float(stats.chisquare(obs, exp / exp.sum() * obs.sum()).pvalue)


def _within(est: float, target: float, se: float, width: float = 3.0) -> bool:
    return abs(est - target) <= width * se


def criterion_table(seed: int = 2024, replicates: int = 100_000) -> CriterionResult:
    worst = 0.0
    rows = []
    exact_oldest = True
    for i, (t, target) in enumerate(zip(TABLE_THETAS, TABLE_MOST_FREQUENT)):
        est = order_stats.estimate_mean_order_statistic(1, float(t), replicates, seed + i)
        worst = max(worst, abs(est.estimate - target))
        rows.append(f"{t}:{est.estimate:.3f}")
        exact_oldest &= gem.mean_jth_oldest(1, t) == 1 / (1 + as_theta(t))
    passed = worst <= 0.01 and exact_oldest
    return CriterionResult(1, "mean largest and oldest population frequencies", passed,
                           f"max |dev| {worst:.4f}; oldest exact={exact_oldest}; " + " ".join(rows))


def criterion_tails(seed: int = 7, replicates: int = 100_000) -> CriterionResult:
    q1 = order_stats.largest_exceeds_half_probability(1)
    q_half = order_stats.largest_exceeds_half_probability(0.5)
    err1, err_half = abs(q1 - math.log(2)), abs(q_half - math.log(1 + math.sqrt(2)))
    mc_ok = True
    parts = []
    for i, (t, exact) in enumerate(((1.0, q1), (0.5, q_half))):
        mc = order_stats.estimate_tail_probability(0.5, t, replicates, seed + i)
        mc_ok &= _within(mc.estimate, exact, mc.std_error)
        parts.append(f"MC theta={t}: {mc.estimate:.4f}+-{mc.std_error:.4f}")
    passed = err1 <= 1e-8 and err_half <= 1e-8 and mc_ok
    return CriterionResult(2, "largest-frequency tails", passed,
                           f"quadrature errors {err1:.1e}, {err_half:.1e}; " + "; ".join(parts))


def criterion_coalescent_esf(seed: int = 11, replicates: int = 100_000) -> CriterionResult:
    batch = simulate_ima(5, 1, replicates, seed)
    keys, counts = np.unique(batch.partitions, axis=0, return_counts=True)
    observed = {AllelicPartition(tuple(int(v) for v in k)): int(c) for k, c in zip(keys, counts)}
    p_part = _chisquare(observed, esf_distribution(5, 1))
    k_obs = dict(zip(*np.unique(batch.k, return_counts=True)))
    p_k = _chisquare({int(k): int(c) for k, c in k_obs.items()},
                     {k: v.value for k, v in k_distribution(5, 1).items()})
    passed = p_part > ALPHA and p_k > ALPHA
    return CriterionResult(3, "coalescent partitions follow the sampling formula", passed,
                           f"partition chi-square p={p_part:.3f}; K p={p_k:.3f}")


def criterion_tmrca(seed: int = 13, replicates: int = 100_000) -> CriterionResult:
    ok = True
    parts = []
    for n in (2, 3, 10, 50):
        s = t_mrcas_statistics(n, replicates, seed + n)
        ok &= _within(s.mean, s.expected_mean, s.std_error)
        parts.append(f"n={n}: {s.mean:.4f} vs {s.expected_mean:.4f}")
    big = t_mrcas_statistics(2, 1_000_000, seed)
    ok &= 0.99 <= big.mean <= 1.01
    parts.append(f"n=2 at 1e6: {big.mean:.4f}")
    return CriterionResult(4, "mean time to the sample's common ancestor", ok, "; ".join(parts))


def criterion_eve(seed: int = 17, replicates: int = 100_000) -> CriterionResult:
    notes = []
    q2 = eve.solve_eve_recurrence(2, 1).q
    exact_q2 = q2 == (Fraction(1, 6), Fraction(1, 3), Fraction(1, 2))
    notes.append(f"q2 exact={exact_q2}")
    means_ok = all(
        eve.solve_eve_recurrence(n, t).mean() == eve.expected_eve_count(n, t)
        for t in ("0.5", "1", "2") for n in range(1, 31)
    )
    notes.append(f"means={means_ok}")
    batch = simulate_ima(5, 1, replicates, seed)
    freq = np.bincount(batch.y_n, minlength=6) / replicates
    q5 = [float(v) for v in eve.solve_eve_recurrence(5, 1).q]
    se = np.sqrt(np.array(q5) * (1 - np.array(q5)) / replicates)
    mc_ok = bool(np.all(np.abs(freq - q5) <= 3 * se))
    notes.append(f"MC q5 cells={mc_ok}")
    mono_ok = bounds_ok = True
    for t in ("0.5", "1", "2"):
        lo, hi = eve.eve_extinction_bounds(t)
        zeros = [eve.solve_eve_recurrence(n, t).q[0] for n in range(2, 41)]
        mono_ok &= all(a <= b for a, b in zip(zeros, zeros[1:]))
        bounds_ok &= all(lo - 1e-15 <= float(z) <= hi for z in zeros)
    notes.append(f"q_n(0) non-decreasing={mono_ok}; bounds={bounds_ok}")
    passed = exact_q2 and means_ok and mc_ok and mono_ok and bounds_ok
    return CriterionResult(5, "Eve's allele", passed, "; ".join(notes))


def criterion_consistency() -> CriterionResult:
    worst = 0.0
    ok = True
    for t in ("0.5", "1", "2"):
        for n in range(2, 9):
            a = check_consistency_recursion(esf_distribution(n, t), esf_distribution(n + 1, t))
            b = check_noninterference(n, t)
            ok &= a.passed and b.passed
            worst = max(worst, float(a.max_residual), float(b.max_residual))
    return CriterionResult(6, "sampling consistency and non-interference", ok, f"max residual {worst:.1e}")


def criterion_moran(seed: int = 19, samples: int = 100_000) -> CriterionResult:
    N, theta = 2, Fraction(1)
    u = float(finite.moran_u_for_theta(N, theta))
    run = finite.moran_stationary_samples(N, u, samples, seed)
    p = _chisquare(run.partition_counts(), esf_distribution(2 * N, theta))
    same = float(run.same_type_pairs.mean())
    se = math.sqrt(same * (1 - same) / samples)
    same_ok = _within(same, 1 / (1 + float(theta)), se)
    return CriterionResult(7, "Moran population reaches the sampling formula", p > ALPHA and same_ok,
                           f"partition chi-square p={p:.3f}; P(same pair)={same:.4f}+-{se:.4f}")


def criterion_hoppe_kelly(seed: int = 23, replicates: int = 100_000) -> CriterionResult:
    ok = True
    parts = []
    for i, (N, t) in enumerate(itertools.product((2, 5), (1, 2))):
        counts = finite.hoppe_age_counts_batch(N, t, replicates, seed + i)[:, 0]
        target = finite.mean_oldest_count(N, t)
        mean, se = counts.mean(), counts.std(ddof=1) / math.sqrt(replicates)
        ok &= _within(mean, float(target), se)
        kelly = finite.kelly_population_oldest_distribution(N, t)
        exact_mean = sum(j * p for j, p in kelly.items())
        ok &= abs(exact_mean - target) <= 1e-12
        parts.append(f"2N={2 * N},theta={t}: {mean:.3f} vs {float(target):.3f}")
    return CriterionResult(8, "oldest-allele count in a finite population", ok, "; ".join(parts))


def criterion_combinatorics(seed: int = 29, samples: int = 100_000) -> CriterionResult:
    exhaustive = all(
        combinatorics.enumerate_cycle_types(n) == {p: esf_probability(p, 1).value for p in partitions(n)}
        for n in range(1, 7)
    )
    n = 1000
    perm_tail, _ = combinatorics.permutation_longest_cycles(n, samples, seed).tail()
    exact_tail = float(combinatorics.longest_cycle_exact_tail(n))
    maps = combinatorics.mapping_largest_components(n, samples, seed + 1)
    map_mean, _ = maps.normalized_mean()
    map_tail, _ = maps.tail()
    passed = (exhaustive and abs(perm_tail - exact_tail) <= 0.01 and abs(map_mean - 0.758) <= 0.01
              and abs(map_tail - 0.881374) <= 0.01)
    return CriterionResult(9, "permutations and mappings", passed,
                           f"exhaustive n<=6={exhaustive}; perm tail {perm_tail:.4f} vs {exact_tail:.4f}; "
                           f"mapping mean {map_mean:.4f}, tail {map_tail:.4f}")


def criterion_age_ordered() -> CriterionResult:
    agg_ok = True
    for n in range(1, 9):
        for t in ("0.5", "1", "2"):
            for p in partitions(n):
                orders = set(itertools.permutations(p.sizes()))
                total = sum(gem.age_ordered_sample_probability(s, t).value for s in orders)
                agg_ok &= total == esf_probability(p, t).value
    cond_ok = True
    for n in range(1, 21):
        for t in ("0.5", "1", "2"):
            present = gem.population_oldest_in_sample_distribution(n, t)
            kelly = gem.oldest_sample_count_distribution(n, t)
            scale = 1 - present[0]
            cond_ok &= all(present[j] / scale == kelly[j] for j in kelly)
    return CriterionResult(10, "age-ordered formulas", agg_ok and cond_ok,
                           f"aggregation n<=8 exact={agg_ok}; conditional-on-presence n<=20 exact={cond_ok}")


def criterion_lambda() -> CriterionResult:
    values = (finite.kesten_lambda(10), finite.kesten_lambda(2), finite.kesten_lambda(exponent=1656520))
    return CriterionResult(11, "iterated-exponential index", values == (1, 0, 3), f"values {values}")


def criterion_out_of_scope() -> CriterionResult:
    # The general order-statistic density is not evaluated; it must refuse rather than guess.
    refused = 0
    for call in (lambda: order_stats.top_density_simplified((0.3,), 1),
                 lambda: order_stats.top_density_simplified((0.3, 0.1), 1),
                 lambda: order_stats.tail_probability(0.4, 1)):
        try:
            call()
        except order_stats.OutOfRegionError:
            refused += 1
    return CriterionResult(12, "general density and asymptotic constant are out of scope", refused == 3,
                           f"{refused}/3 out-of-region queries refused; covered by the property suites")


CRITERIA: tuple[Callable[[], CriterionResult], ...] = (
    criterion_table,
    criterion_tails,
    criterion_coalescent_esf,
    criterion_tmrca,
    criterion_eve,
    criterion_consistency,
    criterion_moran,
    criterion_hoppe_kelly,
    criterion_combinatorics,
    criterion_age_ordered,
    criterion_lambda,
    criterion_out_of_scope,
)


def run_criterion(fn: Callable[[], CriterionResult]) -> CriterionResult:
    start = time.perf_counter()
    result = fn()
    return result._replace(passed=bool(result.passed), seconds=time.perf_counter() - start)


def run_all(report: Callable[[str], None] | None = None) -> list[CriterionResult]:
    results = []
    for fn in CRITERIA:
        r = run_criterion(fn)
        if report is not None:
            report(r.line())
        results.append(r)
    return results
