"""Kingman n-coalescent with infinitely-many-alleles mutation.

Time is measured in units of 2N generations.  While ``j`` lineages remain,
coalescences occur at total rate ``j(j-1)/2`` and each lineage mutates at
rate ``theta/2``; every mutation creates a brand-new allele.  Mutations are
placed along the embedded jump chain, so the holding time of each event is
exponential with rate ``j(j+theta-1)/2`` and the time to the sample's most
recent common ancestor is the sum of those holding times.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

from ._rng import blocks, stream
from .esf import AllelicPartition, as_theta


@dataclass(frozen=True)
class CoalescenceEvent:
    time: float
    merged: tuple  # the two classes (frozensets of leaf labels) that amalgamate


def simulate_tree(n: int, seed: int = 0) -> list[CoalescenceEvent]:
    """Genealogy of ``n`` leaves labelled ``1..n``, as the sequence of coalescences.

    Event times are cumulative.  The classes present before each event always
    partition ``{1..n}``.
    """
    if n < 2:
        raise ValueError("a genealogy needs at least two leaves")
    rng = stream(seed)
    classes = [frozenset([i]) for i in range(1, n + 1)]
    t = 0.0
    events = []
    for j in range(n, 1, -1):
        t += rng.exponential(2.0 / (j * (j - 1)))
        a = int(rng.integers(j))
        b = int(rng.integers(j - 1))
        if b >= a:
            b += 1
        pair = (classes[a], classes[b])
        merged = pair[0] | pair[1]
        classes = [c for i, c in enumerate(classes) if i not in (a, b)] + [merged]
        if sum(len(c) for c in classes) != n or len(frozenset().union(*classes)) != n:
            raise AssertionError("classes no longer partition the leaves")
        events.append(CoalescenceEvent(t, pair))
    return events


@njit(cache=True)
def _ima_walk(rng, n, theta, allele):
    # lineage[i]: lineage carrying leaf i, or -1 once the leaf's allele is fixed.
    # Alleles are numbered in order of creation going back in time, so the
    # largest label is the oldest allele.
    lineage = np.arange(n)
    active = np.ones(n, dtype=np.int64)  # unassigned leaves below each lineage
    allele[:] = -1
    j = n
    t = 0.0
    next_allele = 0
    defining = 0
    while j > 1:
        t += rng.exponential(2.0 / (j * (j + theta - 1.0)))
        if rng.random() < theta / (j + theta - 1.0):
            lin = rng.integers(0, j)
            if active[lin] > 0:
                for i in range(n):
                    if lineage[i] == lin:
                        allele[i] = next_allele
                        lineage[i] = -1
                next_allele += 1
                active[lin] = 0
                defining += 1
        else:
            a = rng.integers(0, j)
            b = rng.integers(0, j - 1)
            if b >= a:
                b += 1
            if a > b:
                a, b = b, a
            if active[a] > 0 and active[b] > 0:
                defining += 1
            for i in range(n):
                if lineage[i] == b:
                    lineage[i] = a
                elif lineage[i] == j - 1:
                    lineage[i] = b
            active[a] += active[b]
            active[b] = active[j - 1]
            active[j - 1] = 0
            j -= 1
    eve = active[0]
    if eve > 0:
        for i in range(n):
            if lineage[i] == 0:
                allele[i] = next_allele
        next_allele += 1
        defining += 1
    return next_allele, eve, t, defining


@njit(cache=True)
def _ima_batch(rng, n, theta, size):
    alleles = np.empty((size, n), dtype=np.int64)
    k = np.empty(size, dtype=np.int64)
    eve = np.empty(size, dtype=np.int64)
    t = np.empty(size)
    defining = np.empty(size, dtype=np.int64)
    for r in range(size):
        k[r], eve[r], t[r], defining[r] = _ima_walk(rng, n, theta, alleles[r])
    return alleles, k, eve, t, defining


@dataclass(frozen=True)
class CoalescentReplicate:
    partition: AllelicPartition
    k: int
    t_mrcas: float
    x_n: int  # copies of the oldest allele in the sample
    y_n: int  # copies of the sample MRCA's own allele (0 if lost)
    seed: tuple
    leaf_alleles: tuple = field(default=(), compare=False, repr=False)
    age_counts: tuple = field(default=(), compare=False, repr=False)  # oldest first
    defining_events: int = field(default=0, compare=False, repr=False)

    def to_json(self) -> str:
        return json.dumps(
            {
                "partition": self.partition.to_json(),
                "k": self.k,
                "t_mrcas": self.t_mrcas,
                "x_n": self.x_n,
                "y_n": self.y_n,
                "seed": list(self.seed),
            },
            separators=(",", ":"),
        )


class ImaBatch(NamedTuple):
    """Column-oriented replicate results; row ``i`` is replicate ``i``."""

    n: int
    seed: int
    partitions: np.ndarray  # (R, n) allele-count vectors a_1..a_n
    age_counts: np.ndarray  # (R, n) allele sizes oldest first, zero padded
    k: np.ndarray
    t_mrcas: np.ndarray
    x_n: np.ndarray
    y_n: np.ndarray
    defining_events: np.ndarray
    leaf_alleles: np.ndarray

    def records(self):
        for i in range(len(self.k)):
            yield CoalescentReplicate(
                partition=AllelicPartition(tuple(int(c) for c in self.partitions[i])),
                k=int(self.k[i]),
                t_mrcas=float(self.t_mrcas[i]),
                x_n=int(self.x_n[i]),
                y_n=int(self.y_n[i]),
                seed=(self.seed, i),
                leaf_alleles=tuple(int(a) for a in self.leaf_alleles[i]),
                age_counts=tuple(int(c) for c in self.age_counts[i] if c),
                defining_events=int(self.defining_events[i]),
            )


def _summarise(n: int, seed: int, alleles, k, eve, t, defining) -> ImaBatch:
    size = alleles.shape[0]
    offsets = np.arange(size)[:, None] * n
    by_label = np.bincount((alleles + offsets).ravel(), minlength=size * n).reshape(size, n)
    # reverse each row's first k labels so the oldest allele comes first
    idx = k[:, None] - 1 - np.arange(n)[None, :]
    age = np.where(idx >= 0, np.take_along_axis(by_label, np.maximum(idx, 0), axis=1), 0)
    sizes = np.where(by_label > 0, by_label - 1 + offsets, -1).ravel()
    parts = np.bincount(sizes[sizes >= 0], minlength=size * n).reshape(size, n)
    return ImaBatch(n, seed, parts, age, k, t, age[:, 0].copy(), eve, defining, alleles)


def simulate_ima(n: int, theta, replicates: int, seed: int) -> ImaBatch:
    """Run ``replicates`` coalescent replicates; block ``b`` of replicates draws from stream ``(seed, b)``."""
    if n < 1:
        raise ValueError("n must be positive")
    t = float(as_theta(theta))
    parts = []
    for b, size in blocks(replicates):
        rng = stream(seed, b)
        if n == 1:
            parts.append((np.zeros((size, 1), dtype=np.int64), np.ones(size, dtype=np.int64),
                          np.ones(size, dtype=np.int64), np.zeros(size), np.ones(size, dtype=np.int64)))
        else:
            parts.append(_ima_batch(rng, n, t, size))
    cols = [np.concatenate(c) for c in zip(*parts)]
    return _summarise(n, seed, *cols)


def run_ima_replicate(n: int, theta, seed: int) -> CoalescentReplicate:
    """One infinitely-many-alleles coalescent replicate for a sample of ``n`` genes."""
    if n < 1:
        raise ValueError("n must be positive")
    t = float(as_theta(theta))
    if n == 1:
        # no genealogy: the single gene carries its ancestor's (Eve's) allele
        cols = (np.zeros((1, 1), dtype=np.int64), np.ones(1, dtype=np.int64), np.ones(1, dtype=np.int64),
                np.zeros(1), np.ones(1, dtype=np.int64))
    else:
        cols = _ima_batch(stream(seed), n, t, 1)
    record = next(_summarise(n, seed, *cols).records())
    return CoalescentReplicate(record.partition, record.k, record.t_mrcas, record.x_n, record.y_n, (seed,),
                               record.leaf_alleles, record.age_counts, record.defining_events)


def k_from_defining_events(n: int, theta, seed: int) -> int:
    """Number of alleles as the count of mutations among ``n`` defining events.

    The event with ``j`` lineages is a mutation with probability
    ``theta/(j+theta-1)``; at ``j = 1`` that is 1 (the root's own allele).
    """
    if n < 1:
        raise ValueError("n must be positive")
    t = float(as_theta(theta))
    return int(k_from_defining_events_batch(n, t, 1, seed, _single=True)[0])


def k_from_defining_events_batch(n: int, theta, replicates: int, seed: int, _single: bool = False) -> np.ndarray:
    t = float(as_theta(theta))
    j = np.arange(n, 0, -1)
    p = t / (j + t - 1.0)
    if _single:
        return (stream(seed).random((1, n)) < p).sum(axis=1)
    out = [(stream(seed, b).random((size, n)) < p).sum(axis=1) for b, size in blocks(replicates)]
    return np.concatenate(out)


class TmrcaStatistics(NamedTuple):
    mean: float
    variance: float
    std_error: float
    histogram: np.ndarray
    bin_edges: np.ndarray
    expected_mean: float
    expected_variance: float


def expected_t_mrcas(n: int) -> float:
    return 2.0 * (1.0 - 1.0 / n)


def variance_t_mrcas(n: int) -> float:
    return math.fsum(4.0 / (j * j * (j - 1) ** 2) for j in range(2, n + 1))


def t_mrcas_statistics(n: int, replicates: int, seed: int, bins: int = 50) -> TmrcaStatistics:
    """Monte Carlo law of the time back to the sample's most recent common ancestor."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if replicates < 1000:
        raise ValueError("need at least 1000 replicates")
    scale = 2.0 / (np.arange(2, n + 1) * np.arange(1, n))
    samples = np.concatenate(
        [stream(seed, b).exponential(1.0, (size, n - 1)) @ scale for b, size in blocks(replicates)]
    )
    mean = float(samples.mean())
    var = float(samples.var(ddof=1))
    hist, edges = np.histogram(samples, bins=bins, range=(0.0, float(np.quantile(samples, 0.999))))
    return TmrcaStatistics(mean, var, math.sqrt(var / replicates), hist, edges, expected_t_mrcas(n), variance_t_mrcas(n))
