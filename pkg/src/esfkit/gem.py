"""GEM (age-ordered) allele frequencies and the closed forms for ages and the oldest allele."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._rng import stream
from .esf import ExactProbability, Number, _exact, _prob, as_theta, log_rising_factorial, rising_factorial

DEFAULT_EPSILON = 1e-12


@dataclass(frozen=True)
class StickWeights:
    weights: np.ndarray
    residual: float
    theta: float
    seed: int

    def __post_init__(self):
        if abs(self.weights.sum() + self.residual - 1.0) > 1e-12:
            raise ValueError("stick weights and residual must sum to one")


@dataclass(frozen=True)
class AgeOrderedSample:
    """Allele counts in age order, oldest first."""

    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if not counts or any(c < 1 for c in counts):
            raise ValueError("age-ordered counts must be positive and non-empty")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def k(self) -> int:
        return len(self.counts)


def gem_block(rng: np.random.Generator, theta: float, size: int, epsilon: float = DEFAULT_EPSILON, chunk: int = 64):
    """Draw ``size`` independent GEM sequences.

    Returns ``(weights, residuals)``: a zero-padded ``(size, m)`` matrix and
    the mass left over in each row once it dropped below ``epsilon``.
    """
    theta = float(theta)
    residual = np.ones(size)
    pieces = []
    while residual.max() >= epsilon:
        # 1 - x = U**(1/theta) inverts the CDF of theta (1 - x)^(theta - 1)
        keep_frac = rng.random((size, chunk)) ** (1.0 / theta)
        after = residual[:, None] * np.cumprod(keep_frac, axis=1)
        before = np.empty_like(after)
        before[:, 0] = residual
        before[:, 1:] = after[:, :-1]
        live = before >= epsilon
        pieces.append(np.where(live, before - after, 0.0))
        last = np.where(live, after, np.inf).min(axis=1)
        residual = np.where(np.isinf(last), residual, last)
    return np.hstack(pieces), residual


def sample_gem(theta, epsilon: float = DEFAULT_EPSILON, seed: int = 0) -> StickWeights:
    """Stick-breaking draw of age-ordered population frequencies, truncated at residual < epsilon."""
    if not 0 < epsilon <= 1e-6:
        raise ValueError("epsilon must lie in (0, 1e-6]")
    t = float(as_theta(theta))
    w, r = gem_block(stream(seed), t, 1, epsilon)
    row = w[0]
    return StickWeights(row[row > 0], float(r[0]), t, seed)


def mean_jth_oldest(j: int, theta) -> Number:
    """Mean population frequency of the j-th oldest allele."""
    if j < 1:
        raise ValueError("j must be positive")
    theta = as_theta(theta)
    return 1 / (1 + theta) * (theta / (1 + theta)) ** (j - 1)


def _log_gen_binom(x: float, j: int) -> float:
    return math.lgamma(x + 1) - math.lgamma(j + 1) - math.lgamma(x - j + 1)


def _gen_binom(x: Fraction, j: int) -> Fraction:
    out = Fraction(1)
    for i in range(j):
        out *= x - i
    return out / math.factorial(j)


def _kelly_terms(n: int, theta, lead) -> dict:
    # lead * C(n, j) / C(n + theta - 1, j), j = 1..n
    if _exact(theta, n):
        return {j: lead * math.comb(n, j) / _gen_binom(n + theta - 1, j) for j in range(1, n + 1)}
    t = float(theta)
    base = math.log(float(lead))
    return {
        j: math.exp(base + math.log(math.comb(n, j)) - _log_gen_binom(n + t - 1, j)) for j in range(1, n + 1)
    }


def oldest_sample_count_distribution(n: int, theta) -> dict:
    """Law of the number of copies of the oldest allele in the sample."""
    if n < 1:
        raise ValueError("n must be positive")
    theta = as_theta(theta)
    lead = theta / n if _exact(theta, n) else float(theta) / n
    return _kelly_terms(n, theta, lead)


def population_oldest_in_sample_distribution(n: int, theta) -> dict:
    """Law of the number of copies, in the sample, of the population's oldest allele (0 allowed)."""
    if n < 1:
        raise ValueError("n must be positive")
    theta = as_theta(theta)
    lead = theta / (n + theta) if _exact(theta, n) else float(theta) / (n + float(theta))
    out = {0: lead}
    out.update(_kelly_terms(n, theta, lead))
    return out


def age_ordered_sample_probability(s, theta) -> ExactProbability:
    """Probability of ``k`` alleles with the given age-ordered counts (oldest first).

    For ``k = 1`` the product of cumulative sums in the denominator is empty.
    """
    if not isinstance(s, AgeOrderedSample):
        s = AgeOrderedSample(tuple(s))
    theta = as_theta(theta)
    n, k = s.n, s.k
    cumulative = list(itertools.accumulate(reversed(s.counts)))[:-1]  # n_(k), n_(k)+n_(k-1), ..., down to n_(2)
    if _exact(theta, n):
        denom = rising_factorial(theta, n) * math.prod(cumulative)
        return _prob(theta**k * math.factorial(n - 1) / denom, "age-ordered")
    t = float(theta)
    log_value = k * math.log(t) + math.lgamma(n) - log_rising_factorial(t, n) - sum(map(math.log, cumulative))
    return _prob(math.exp(log_value), "age-ordered")


def compositions(n: int, k: int | None = None):
    """Ordered tuples of positive integers summing to ``n`` (optionally with exactly ``k`` parts)."""
    for cuts in range(n):
        if k is not None and cuts != k - 1:
            continue
        for pos in itertools.combinations(range(1, n), cuts):
            edges = (0,) + pos + (n,)
            yield tuple(b - a for a, b in zip(edges, edges[1:]))


def all_same_type_probabilities(n: int, theta) -> tuple:
    """``(as_oldest, any_type, oldest_given_same)`` for ``n`` genes drawn from the population."""
    if n < 1:
        raise ValueError("n must be positive")
    theta = as_theta(theta)
    if not _exact(theta, n):
        theta = float(theta)
    # n!/((1+theta)...(n+theta)) and (n-1)!/((1+theta)...(n-1+theta)), kept as ratios to avoid overflow
    any_type = Fraction(1) if isinstance(theta, Fraction) else 1.0
    for i in range(1, n):
        any_type *= Fraction(i) / (i + theta)
    as_oldest = any_type * n / (n + theta)
    return as_oldest, any_type, as_oldest / any_type


def size_biased_permutation(freqs: Sequence[float], seed: int = 0) -> list:
    """Reorder ``freqs`` by repeated draws proportional to frequency, without replacement."""
    values = [float(f) for f in freqs]
    if not values or any(v <= 0 for v in values):
        raise ValueError("frequencies must be positive")
    if abs(math.fsum(values) - 1.0) > 1e-9:
        raise ValueError("frequencies must sum to one")
    rng = stream(seed)
    remaining = list(values)
    out = []
    while remaining:
        u = rng.random() * math.fsum(remaining)
        acc = 0.0
        pick = len(remaining) - 1
        for i, v in enumerate(remaining):
            acc += v
            if u < acc:
                pick = i
                break
        out.append(remaining.pop(pick))
    return out


def size_biased_pick(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One size-biased draw per row of a (padded) weight matrix; returns the chosen weights."""
    cum = np.cumsum(weights, axis=1)
    u = rng.random(weights.shape[0]) * cum[:, -1]
    idx = (cum <= u[:, None]).sum(axis=1)
    idx = np.minimum(idx, weights.shape[1] - 1)
    return weights[np.arange(weights.shape[0]), idx]
