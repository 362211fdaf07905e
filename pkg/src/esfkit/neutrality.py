"""Homozygosity test of neutrality, with a null law conditioned on the allele count.

Given K = k the partition law no longer depends on theta, so the null
distribution of the homozygosity is simulated from an urn run at any
convenient theta and kept only when it produces exactly k alleles.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize

from ._rng import blocks, stream
from .esf import AllelicPartition, as_partition, expected_k_closed_form


def sample_homozygosity(p) -> float:
    """``F = sum_j a_j (j/n)^2``."""
    p = as_partition(p)
    return sum(a * j * j for j, a in enumerate(p.counts, 1)) / p.n**2


def _sum_of_squares(p: AllelicPartition) -> int:
    return sum(a * j * j for j, a in enumerate(p.counts, 1))


def tuned_theta(n: int, k: int) -> float:
    """Theta at which the expected number of alleles in ``n`` genes equals ``k`` (1 < k < n)."""
    if not 1 < k < n:
        raise ValueError("a finite positive theta exists only for 1 < k < n")
    return optimize.brentq(lambda t: float(expected_k_closed_form(n, t)) - k, 1e-9, 1e9, xtol=1e-12)


def _urn_block(rng, n: int, theta: float, size: int) -> tuple[np.ndarray, np.ndarray]:
    # Hoppe urn for every row at once: gene i (0-based) founds a new allele with
    # probability theta/(theta+i), otherwise copies a uniformly chosen earlier gene.
    labels = np.zeros((size, n), dtype=np.int64)
    k = np.ones(size, dtype=np.int64)
    rows = np.arange(size)
    for i in range(1, n):
        new = rng.random(size) < theta / (theta + i)
        pick = rng.integers(0, i, size=size)
        labels[:, i] = np.where(new, k, labels[rows, pick])
        k += new
    return labels, k


def _sizes_block(labels: np.ndarray) -> np.ndarray:
    size, n = labels.shape
    offsets = np.arange(size)[:, None] * n
    return np.bincount((labels + offsets).ravel(), minlength=size * n).reshape(size, n)


def conditional_null_batch(n: int, k: int, replicates: int, seed: int, theta: float | None = None) -> np.ndarray:
    """``(replicates, n)`` allele-size rows drawn from the partition law given ``K = k``.

    Rows are accepted in generation order, so the output depends only on
    ``(n, k, replicates, seed, theta)``.
    """
    if n < 1 or not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if replicates < 1:
        raise ValueError("replicates must be positive")
    if k == 1:
        return np.pad(np.full((replicates, 1), n, dtype=np.int64), ((0, 0), (0, n - 1)))
    if k == n:
        return np.ones((replicates, n), dtype=np.int64)
    t = tuned_theta(n, k) if theta is None else float(theta)
    if t <= 0:
        raise ValueError("theta must be positive")
    accepted = []
    have = 0
    batch = 4096
    b = 0
    while have < replicates:
        labels, kk = _urn_block(stream(seed, b), n, t, batch)
        rows = _sizes_block(labels[kk == k])
        accepted.append(rows)
        have += rows.shape[0]
        b += 1
    return np.vstack(accepted)[:replicates]


def conditional_null_sample(n: int, k: int, seed: int = 0, theta: float | None = None) -> AllelicPartition:
    """One partition of ``n`` genes into exactly ``k`` alleles, drawn from the theta-free conditional law."""
    sizes = conditional_null_batch(n, k, 1, seed, theta)[0]
    return AllelicPartition.from_sizes([int(s) for s in sizes if s])


@dataclass(frozen=True)
class NeutralityReport:
    statistic: float
    k: int
    n: int
    p_lower: float  # fraction of null F <= observed (excess evenness)
    p_upper: float  # fraction of null F >= observed (excess skew)
    replicates: int
    seed: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))


def neutrality_test(p, replicates: int = 10_000, seed: int = 0) -> NeutralityReport:
    if replicates < 10_000:
        raise ValueError("need at least 10^4 replicates")
    p = as_partition(p)
    observed = _sum_of_squares(p)
    null = (conditional_null_batch(p.n, p.k, replicates, seed) ** 2).sum(axis=1)
    return NeutralityReport(
        statistic=observed / p.n**2,
        k=p.k,
        n=p.n,
        p_lower=float((null <= observed).mean()),
        p_upper=float((null >= observed).mean()),
        replicates=replicates,
        seed=seed,
    )
