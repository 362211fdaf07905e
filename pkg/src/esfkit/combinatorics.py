"""Random permutations and random mappings as instances of the allelic partition laws.

Cycle lengths of a uniform permutation follow the Ewens formula with
theta = 1 exactly; component sizes of a uniform self-map of {1..n} follow it
with theta = 1/2 only in the large-n limit.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from numba import njit

from ._rng import blocks, stream
from .esf import AllelicPartition

CycleType = AllelicPartition


@njit(cache=True)
def _cycle_lengths(perm, out):
    # out[j-1] += 1 for each cycle of length j; returns the longest cycle
    n = perm.shape[0]
    seen = np.zeros(n, dtype=np.bool_)
    longest = 0
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        out[length - 1] += 1
        if length > longest:
            longest = length
    return longest


@njit(cache=True)
def _longest_cycles(perms):
    rows, n = perms.shape
    out = np.empty(rows, dtype=np.int64)
    scratch = np.zeros(n, dtype=np.int64)
    for r in range(rows):
        out[r] = _cycle_lengths(perms[r], scratch)
    return out


@njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True)
def _component_sizes(f, out):
    # union each i with f(i); components of the functional graph are the union-find classes
    n = f.shape[0]
    parent = np.arange(n)
    for i in range(n):
        a = _find(parent, i)
        b = _find(parent, f[i])
        if a != b:
            parent[a] = b
    size = np.zeros(n, dtype=np.int64)
    for i in range(n):
        size[_find(parent, i)] += 1
    largest = 0
    for i in range(n):
        if size[i] > 0:
            out[size[i] - 1] += 1
            if size[i] > largest:
                largest = size[i]
    return largest


@njit(cache=True)
def _largest_components(maps):
    rows, n = maps.shape
    out = np.empty(rows, dtype=np.int64)
    scratch = np.zeros(n, dtype=np.int64)
    for r in range(rows):
        out[r] = _component_sizes(maps[r], scratch)
    return out


def cycle_type(perm) -> CycleType:
    """Cycle type of a permutation of ``0..n-1`` given in one-line notation."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(perm.size)):
        raise ValueError("not a permutation of 0..n-1")
    counts = np.zeros(perm.size, dtype=np.int64)
    _cycle_lengths(perm, counts)
    return AllelicPartition(tuple(counts.tolist()))


def random_permutation_cycle_type(n: int, seed: int = 0) -> CycleType:
    if n < 1:
        raise ValueError("n must be positive")
    return cycle_type(stream(seed).permutation(n))


def mapping_component_type(f) -> CycleType:
    """Component sizes of the functional graph of ``f: {0..n-1} -> {0..n-1}``."""
    f = np.asarray(f, dtype=np.int64)
    if f.size == 0 or f.min() < 0 or f.max() >= f.size:
        raise ValueError("not a self-map of 0..n-1")
    counts = np.zeros(f.size, dtype=np.int64)
    _component_sizes(f, counts)
    return AllelicPartition(tuple(counts.tolist()))


def random_mapping_component_sizes(n: int, seed: int = 0) -> CycleType:
    if n < 1:
        raise ValueError("n must be positive")
    return mapping_component_type(stream(seed).integers(0, n, size=n))


def longest_cycle_exact_tail(n: int) -> Fraction:
    """Exact probability that a uniform permutation of ``n`` has a cycle longer than ``n/2``."""
    if n < 1:
        raise ValueError("n must be positive")
    return sum((Fraction((-1) ** (i + 1), i) for i in range(1, n + 1)), Fraction(0))


def enumerate_cycle_types(n: int) -> dict:
    """Exhaustive cycle-type law over all ``n!`` permutations (as exact fractions)."""
    counts: dict = {}
    total = 0
    for perm in itertools.permutations(range(n)):
        key = cycle_type(perm)
        counts[key] = counts.get(key, 0) + 1
        total += 1
    return {k: Fraction(v, total) for k, v in counts.items()}


class LargestSample(NamedTuple):
    largest: np.ndarray  # size of the longest cycle / largest component per sample
    n: int

    def normalized_mean(self) -> tuple[float, float]:
        x = self.largest / self.n
        return float(x.mean()), float(x.std(ddof=1) / np.sqrt(x.size))

    def tail(self, fraction: float = 0.5) -> tuple[float, float]:
        p = float((self.largest > fraction * self.n).mean())
        return p, float(np.sqrt(p * (1 - p) / self.largest.size))


def _sample_blocks(n: int, samples: int, seed: int, draw, kernel, block_size: int) -> LargestSample:
    out = []
    for b, size in blocks(samples, block_size):
        out.append(kernel(draw(stream(seed, b), size)))
    return LargestSample(np.concatenate(out), n)


def permutation_longest_cycles(n: int, samples: int, seed: int) -> LargestSample:
    """Longest-cycle lengths of ``samples`` uniform permutations of size ``n``."""
    block = max(1, min(4096, 2_000_000 // n))

    def draw(rng, size):
        return rng.permuted(np.tile(np.arange(n, dtype=np.int64), (size, 1)), axis=1)

    return _sample_blocks(n, samples, seed, draw, _longest_cycles, block)


def mapping_largest_components(n: int, samples: int, seed: int) -> LargestSample:
    """Largest-component sizes of ``samples`` uniform self-maps of size ``n``."""
    block = max(1, min(4096, 2_000_000 // n))

    def draw(rng, size):
        return rng.integers(0, n, size=(size, n), dtype=np.int64)

    return _sample_blocks(n, samples, seed, draw, _largest_components, block)
