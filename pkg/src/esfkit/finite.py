"""Finite-population models: Moran birth-death chain, Hoppe's age-ordered counts,
Kelly's oldest-allele law, mean allele ages, and the charge-state model."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import mpmath
import numpy as np
from numba import njit

from ._rng import blocks, stream
from .esf import AllelicPartition, Number, as_theta
from .gem import oldest_sample_count_distribution


def moran_theta(N: int, u) -> Number:
    """Mutation parameter ``2Nu/(1-u)`` of a Moran population of ``2N`` genes."""
    if N < 1:
        raise ValueError("N must be positive")
    u = Fraction(u) if isinstance(u, (int, Fraction, str)) else float(u)
    if not 0 < u < 1:
        raise ValueError("u must lie strictly between 0 and 1")
    return 2 * N * u / (1 - u)


def moran_u_for_theta(N: int, theta) -> Number:
    """Inverse of :func:`moran_theta`."""
    theta = as_theta(theta)
    return theta / (2 * N + theta)


@dataclass
class MoranPopulation:
    genes: np.ndarray  # allele label of each of the 2N genes
    u: float
    next_label: int
    exclude_self: bool = False  # forbid the dying gene from also being the parent

    @classmethod
    def distinct(cls, N: int, u: float, exclude_self: bool = False) -> "MoranPopulation":
        if N < 1:
            raise ValueError("N must be positive")
        if not 0 <= u < 1:
            raise ValueError("u must lie in [0, 1)")
        return cls(np.arange(2 * N, dtype=np.int64), float(u), 2 * N, exclude_self)

    def partition(self) -> AllelicPartition:
        _, counts = np.unique(self.genes, return_counts=True)
        return AllelicPartition.from_sizes(counts.tolist())

    def to_json(self) -> str:
        return json.dumps({"genes": self.genes.tolist(), "u": self.u, "next_label": self.next_label,
                           "exclude_self": self.exclude_self}, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "MoranPopulation":
        d = json.loads(text)
        return cls(np.asarray(d["genes"], dtype=np.int64), d["u"], d["next_label"], d.get("exclude_self", False))


@njit(cache=True)
def _moran_run(rng, genes, next_label, u, steps, exclude_self):
    m = genes.shape[0]
    for _ in range(steps):
        dead = rng.integers(0, m)
        if exclude_self:
            parent = rng.integers(0, m - 1)
            if parent >= dead:
                parent += 1
        else:
            parent = rng.integers(0, m)
        if rng.random() < u:
            genes[dead] = next_label
            next_label += 1
        else:
            genes[dead] = genes[parent]
    return next_label


def moran_step(pop: MoranPopulation, rng: np.random.Generator, steps: int = 1) -> MoranPopulation:
    """Advance ``steps`` birth-death events in place and return the population.

    Each event kills a uniformly chosen gene and copies a uniformly chosen
    parent (independently chosen, so possibly the same gene) into its slot;
    with probability ``u`` the copy is a brand-new allele.
    """
    if pop.exclude_self and pop.genes.size < 2:
        raise ValueError("self-exclusion needs at least two genes")
    pop.next_label = int(_moran_run(rng, pop.genes, pop.next_label, pop.u, steps, pop.exclude_self))
    return pop


@njit(cache=True)
def _moran_snapshots(rng, genes, next_label, u, thin, count, exclude_self):
    m = genes.shape[0]
    parts = np.zeros((count, m), dtype=np.int64)
    same = np.empty(count, dtype=np.int64)
    for s in range(count):
        next_label = _moran_run(rng, genes, next_label, u, thin, exclude_self)
        for i in range(m):
            c = 0
            for j in range(m):
                if genes[j] == genes[i]:
                    c += 1
            parts[s, c - 1] += 1
        for j in range(m):
            parts[s, j] //= j + 1
        a = rng.integers(0, m)
        b = rng.integers(0, m - 1)
        if b >= a:
            b += 1
        same[s] = 1 if genes[a] == genes[b] else 0
    return parts, same, next_label


class MoranSamples(NamedTuple):
    partitions: np.ndarray  # (samples, 2N) full-population allele-count vectors
    same_type_pairs: np.ndarray  # 1 where two genes drawn without replacement matched

    def partition_counts(self) -> dict:
        keys, counts = np.unique(self.partitions, axis=0, return_counts=True)
        return {AllelicPartition(tuple(int(v) for v in k)): int(c) for k, c in zip(keys, counts)}


def moran_stationary_samples(N: int, u: float, samples: int, seed: int, chains: int = 8,
                             burn_in: int | None = None, thin: int | None = None,
                             exclude_self: bool = False) -> MoranSamples:
    """Snapshots of the full population after burn-in, spread over independent chains.

    Defaults: burn-in ``20 (2N)^2`` steps and ``(2N)^2`` steps between snapshots.
    Each snapshot also records whether two genes drawn without replacement share an allele.
    """
    if N < 1 or samples < 1:
        raise ValueError("N and samples must be positive")
    m = 2 * N
    burn_in = 20 * m * m if burn_in is None else burn_in
    thin = m * m if thin is None else thin
    chains = max(1, min(chains, samples))
    parts, same = [], []
    for c in range(chains):
        rng = stream(seed, c)
        pop = MoranPopulation.distinct(N, u, exclude_self)
        moran_step(pop, rng, burn_in)
        count = samples // chains + (1 if c < samples % chains else 0)
        p, s, pop.next_label = _moran_snapshots(rng, pop.genes, pop.next_label, pop.u, thin, count, exclude_self)
        parts.append(p)
        same.append(s)
    return MoranSamples(np.vstack(parts), np.concatenate(same))


def hoppe_age_counts(N: int, theta, seed: int = 0) -> list[int]:
    """Age-ordered allele counts (oldest first) of a population of ``2N`` genes."""
    return [int(c) for c in hoppe_age_counts_batch(N, theta, 1, seed, _single=True)[0] if c]


def _hoppe_block(rng, m: int, theta: float, size: int) -> np.ndarray:
    out = np.zeros((size, m), dtype=np.int64)
    remaining = np.full(size, m, dtype=np.int64)
    i = 0
    while remaining.any():
        live = remaining > 0
        x = 1.0 - rng.random(size) ** (1.0 / theta)
        extra = rng.binomial(np.maximum(remaining - 1, 0), x)
        counts = np.where(live, 1 + extra, 0)
        out[:, i] = counts
        remaining -= counts
        i += 1
    return out


def hoppe_age_counts_batch(N: int, theta, replicates: int, seed: int, _single: bool = False) -> np.ndarray:
    """``(replicates, 2N)`` matrix of age-ordered counts, zero padded on the right."""
    if N < 1:
        raise ValueError("N must be positive")
    t = float(as_theta(theta))
    if _single:
        return _hoppe_block(stream(seed), 2 * N, t, 1)
    return np.vstack([_hoppe_block(stream(seed, b), 2 * N, t, size) for b, size in blocks(replicates)])


def kelly_population_oldest_distribution(N: int, theta) -> dict:
    """Exact law of the number of genes carrying the population's oldest allele."""
    if N < 1:
        raise ValueError("N must be positive")
    return oldest_sample_count_distribution(2 * N, theta)


def mean_oldest_count(N: int, theta) -> Number:
    theta = as_theta(theta)
    return (2 * N + theta) / (1 + theta)


def monomorphism_exact(N: int, theta) -> Number:
    """Probability that a single allele occupies all ``2N`` genes."""
    theta = as_theta(theta)
    out = Fraction(1)
    for i in range(1, 2 * N):
        out *= i / (i + theta)
    return out


def _age_terms(N: int, theta: float, upto: int):
    return [4 * N / (j * (j + theta - 1)) for j in range(1, upto + 1)]


def mean_age_oldest(N: int, theta) -> float:
    """Mean age, in generations, of the population's oldest allele."""
    t = float(as_theta(theta))
    return math.fsum(_age_terms(N, t, 2 * N))


def mean_age_given_frequency(N: int, theta, p: float) -> float:
    """Mean age, in generations, of an allele currently at population frequency ``p``."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    t = float(as_theta(theta))
    return math.fsum(term * -math.expm1(j * math.log1p(-p)) if p < 1 else term
                     for j, term in enumerate(_age_terms(N, t, 2 * N), 1))


def mean_age_oldest_in_sample(N: int, n: int, theta) -> float:
    """Mean age, in generations, of the oldest allele in a sample of ``n`` genes."""
    if not 1 <= n <= 2 * N:
        raise ValueError("sample size must lie in 1..2N")
    t = float(as_theta(theta))
    return math.fsum(_age_terms(N, t, n))


@dataclass
class ChargeStatePopulation:
    charges: np.ndarray
    u: float

    @classmethod
    def monomorphic(cls, N: int, u: float) -> "ChargeStatePopulation":
        if not 0 <= u <= 1:
            raise ValueError("u must lie in [0, 1]")
        return cls(np.zeros(2 * N, dtype=np.int64), float(u))

    def occupied(self) -> int:
        return int(np.unique(self.charges).size)

    def spread(self) -> int:
        return int(self.charges.max() - self.charges.min())


def charge_state_step(pop: ChargeStatePopulation, rng: np.random.Generator) -> ChargeStatePopulation:
    """One Wright-Fisher generation: resample parents with replacement, then shift by +/-1 with probability u."""
    m = pop.charges.size
    parents = rng.integers(0, m, size=m)
    child = pop.charges[parents]
    mutate = rng.random(m) < pop.u
    child = child + np.where(mutate, rng.choice(np.array([-1, 1]), size=m), 0)
    return ChargeStatePopulation(child, pop.u)


class ChargeStateTrace(NamedTuple):
    spread: np.ndarray
    occupied: np.ndarray


def run_charge_state(N: int, u: float, generations: int, seed: int) -> ChargeStateTrace:
    rng = stream(seed)
    pop = ChargeStatePopulation.monomorphic(N, u)
    spread = np.empty(generations, dtype=np.int64)
    occupied = np.empty(generations, dtype=np.int64)
    for g in range(generations):
        pop = charge_state_step(pop, rng)
        spread[g] = pop.spread()
        occupied[g] = pop.occupied()
    return ChargeStateTrace(spread, occupied)


def _parse_size(two_n) -> mpmath.mpf:
    # natural log of 2N; accepts ints, "10^E" strings and ("10^", E) exponent pairs
    if isinstance(two_n, str):
        text = two_n.replace(" ", "")
        if text.startswith("10^") or text.startswith("10**"):
            exponent = int(text.split("^")[-1] if "^" in text else text[4:])
            if exponent < 0:
                raise ValueError("2N must be at least 1")
            return exponent * mpmath.log(10)
        two_n = int(text)
    if isinstance(two_n, bool) or not isinstance(two_n, int):
        raise TypeError("2N must be an integer or a '10^E' string")
    if two_n < 1:
        raise ValueError("2N must be at least 1")
    return mpmath.log(mpmath.mpf(two_n))


def _tower_below(k: int, log_x) -> bool:
    # gamma_k < x, tested on logarithms: gamma_k < x  <=>  gamma_{k-1} < log x
    if k == 0:
        return log_x > 0
    if log_x <= 0:
        return False
    return _tower_below(k - 1, mpmath.log(log_x))


def kesten_lambda(two_n=None, *, exponent: int | None = None) -> int:
    """Largest ``k`` with ``gamma_k < 2N`` for ``gamma_0 = 1``, ``gamma_{k+1} = exp(gamma_k)``.

    ``2N`` may be an integer, a ``"10^E"`` string, or given as ``exponent=E``.
    When no ``gamma_k`` lies below ``2N`` (only ``2N = 1``) the count is 0.
    """
    with mpmath.workdps(60):
        log_x = exponent * mpmath.log(10) if exponent is not None else _parse_size(two_n)
        if exponent is not None and exponent < 0:
            raise ValueError("exponent must be non-negative")
        k = 0
        while _tower_below(k + 1, log_x):
            k += 1
        return k
