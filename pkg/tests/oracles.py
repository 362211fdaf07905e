"""Brute-force reference computations, written independently of the package code."""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from fractions import Fraction

import numpy as np


def urn_paths(n: int, theta: Fraction) -> dict:
    """Exact law of the class sizes in creation order after ``n`` draws of the sequential urn.

    Draw ``i`` (with ``i`` genes present) founds a class with probability
    ``theta/(theta+i)`` or joins class ``c`` with probability ``size_c/(theta+i)``.
    """
    states = {(): Fraction(1)}
    for i in range(n):
        nxt: dict = defaultdict(Fraction)
        for sizes, p in states.items():
            denom = theta + i
            nxt[sizes + (1,)] += p * theta / denom
            for c, s in enumerate(sizes):
                grown = sizes[:c] + (s + 1,) + sizes[c + 1:]
                nxt[grown] += p * s / denom
        states = dict(nxt)
    return states


def counts_of(sizes, n: int) -> tuple:
    a = [0] * n
    for s in sizes:
        a[s - 1] += 1
    return tuple(a)


def urn_partition_law(n: int, theta: Fraction) -> dict:
    out: dict = defaultdict(Fraction)
    for sizes, p in urn_paths(n, theta).items():
        out[counts_of(sizes, n)] += p
    return dict(out)


def urn_k_law(n: int, theta: Fraction) -> dict:
    out: dict = defaultdict(Fraction)
    for sizes, p in urn_paths(n, theta).items():
        out[len(sizes)] += p
    return dict(out)


def urn_first_class_law(n: int, theta: Fraction) -> dict:
    """Law of the size of the first-founded (oldest) class."""
    out: dict = defaultdict(Fraction)
    for sizes, p in urn_paths(n, theta).items():
        out[sizes[0]] += p
    return dict(out)


def cycle_counts(perm) -> tuple:
    n = len(perm)
    seen = [False] * n
    a = [0] * n
    for s in range(n):
        length = 0
        while not seen[s]:
            seen[s] = True
            s = perm[s]
            length += 1
        if length:
            a[length - 1] += 1
    return tuple(a)


def longest_cycle_tail_by_enumeration(n: int) -> Fraction:
    hits = 0
    for perm in itertools.permutations(range(n)):
        a = cycle_counts(perm)
        if any(a[j - 1] for j in range(n // 2 + 1, n + 1)):
            hits += 1
    return Fraction(hits, math.factorial(n))


def moran_partition_chain(m: int, u: float, exclude_self: bool = False):
    """Stationary law of the allelic partition of a Moran population of ``m`` genes.

    States are sorted class-size tuples; one step kills a uniform gene and
    copies a uniform parent (independently chosen unless ``exclude_self``),
    replacing the copy by a new allele with probability ``u``.
    """
    def parts(k, largest):
        if k == 0:
            yield ()
            return
        for s in range(min(k, largest), 0, -1):
            for rest in parts(k - s, s):
                yield (s,) + rest

    states = list(parts(m, m))
    index = {s: i for i, s in enumerate(states)}
    P = np.zeros((len(states), len(states)))

    def canon(sizes):
        return tuple(sorted((s for s in sizes if s), reverse=True))

    for s in states:
        i = index[s]
        for d, sd in enumerate(s):  # class of the dying gene
            p_die = sd / m
            after_death = list(s)
            after_death[d] -= 1
            # mutation: the slot gets a new singleton class
            P[i, index[canon(after_death + [1])]] += p_die * u
            for c, sc in enumerate(s):  # class of the parent
                if exclude_self:
                    p_par = (sc - (1 if c == d else 0)) / (m - 1)
                else:
                    p_par = sc / m
                if p_par == 0:
                    continue
                grown = after_death[:]
                grown[c] += 1
                P[i, index[canon(grown)]] += p_die * p_par * (1 - u)
    w, v = np.linalg.eig(P.T)
    pi = np.real(v[:, np.argmin(np.abs(w - 1))])
    pi /= pi.sum()
    return {counts_of(s, m): float(p) for s, p in zip(states, pi)}
