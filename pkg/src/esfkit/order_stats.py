"""Order statistics of the Kingman (Poisson-Dirichlet) distribution.

Closed forms exist only where the largest frequencies exceed the rest
combined; outside that region the density needs a function defined through
a Laplace transform, which this module does not evaluate.  Such queries
raise :class:`OutOfRegionError` and must go through Monte Carlo instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import integrate

from ._rng import blocks, stream
from .esf import as_theta
from .gem import DEFAULT_EPSILON, gem_block


class OutOfRegionError(ValueError):
    """The requested point lies where no simplified closed form applies."""


@dataclass(frozen=True)
class OrderedFrequencies:
    values: tuple
    residual: float

    def __post_init__(self):
        v = self.values
        if any(x <= 0 for x in v) or any(a < b for a, b in zip(v, v[1:])):
            raise ValueError("ordered frequencies must be positive and non-increasing")
        if self.residual < 0 or abs(math.fsum(v) + self.residual - 1) > 1e-12:
            raise ValueError("frequencies plus residual must sum to one")

    @classmethod
    def from_weights(cls, weights, residual: float = 0.0) -> "OrderedFrequencies":
        w = sorted((float(x) for x in weights if x > 0), reverse=True)
        return cls(tuple(w), float(residual))


def top_density_simplified(x: Sequence[float], theta) -> float:
    """Joint density of the ``r`` largest frequencies, where the simple form holds.

    Valid when ``x_1 + ... + x_{r-1} + 2 x_r >= 1``; for ``r = 1`` that is
    ``x_1 >= 1/2``.
    """
    t = float(as_theta(theta))
    x = [float(v) for v in x]
    if not x:
        raise ValueError("need at least one order statistic")
    if any(v <= 0 for v in x) or any(a <= b for a, b in zip(x, x[1:])):
        raise ValueError("order statistics must be positive and strictly decreasing")
    total = math.fsum(x)
    if total > 1 + 1e-15:
        raise ValueError("order statistics sum to more than one")
    if total + x[-1] < 1 - 1e-15:
        raise OutOfRegionError("outside the simplified region; estimate by Monte Carlo instead")
    rest = max(0.0, 1.0 - total)
    if rest == 0.0 and t < 1:
        return math.inf
    return t ** len(x) / math.prod(x) * rest ** (t - 1)


def tail_probability(threshold: float, theta) -> float:
    """``P(largest frequency > threshold)`` for ``threshold >= 1/2``, by quadrature.

    With ``u = (1 - x)^theta`` the density ``theta x^-1 (1-x)^(theta-1)``
    becomes ``1/(1 - u^(1/theta))`` on ``[0, (1-threshold)^theta]``, which has
    no endpoint singularity for any theta.
    """
    t = float(as_theta(theta))
    if not 0.5 <= threshold <= 1:
        raise OutOfRegionError("closed-form tail only available for thresholds in [1/2, 1]")
    upper = (1.0 - threshold) ** t
    if upper == 0.0:
        return 0.0
    value, _ = integrate.quad(lambda u: 1.0 / (1.0 - u ** (1.0 / t)), 0.0, upper, epsabs=1e-13, epsrel=1e-12, limit=200)
    return value


def monomorphism_probability(threshold: float, theta) -> float:
    """Probability that the most frequent allele has frequency above ``threshold`` (> 1/2)."""
    if not 0.5 < threshold < 1:
        raise OutOfRegionError("threshold must lie in (1/2, 1)")
    return tail_probability(threshold, theta)


def largest_exceeds_half_probability(theta) -> float:
    return tail_probability(0.5, theta)


def mean_largest_bounds(theta) -> tuple[float, float]:
    """Lower and upper bounds on the mean largest frequency.

    The upper bound only carries information for theta < 1.
    """
    t = float(as_theta(theta))
    return 0.5**t, 1.0 - t * (1.0 - t) * math.log(2)


class MonteCarloEstimate(NamedTuple):
    estimate: float
    std_error: float
    flagged: int = 0


def _ranked_values(theta: float, rank: int, replicates: int, seed: int, epsilon: float):
    for index, size in blocks(replicates):
        w, resid = gem_block(stream(seed, index), theta, size, epsilon)
        short = (w > 0).sum(axis=1) < rank
        # the residual stands in for every stick beyond the truncation
        padded = np.hstack([w, resid[:, None]]) if rank > 1 else w
        if rank > padded.shape[1]:
            padded = np.hstack([padded, np.zeros((size, rank - padded.shape[1]))])
        top = -np.partition(-padded, rank - 1, axis=1)[:, rank - 1]
        yield top, int(short.sum())


def estimate_mean_order_statistic(rank: int, theta, replicates: int, seed: int, epsilon: float = DEFAULT_EPSILON) -> MonteCarloEstimate:
    """Monte Carlo mean of the ``rank``-th largest population frequency from GEM draws."""
    if rank < 1:
        raise ValueError("rank must be positive")
    if replicates < 1000:
        raise ValueError("need at least 1000 replicates")
    t = float(as_theta(theta))
    total = 0.0
    total_sq = 0.0
    flagged = 0
    for top, short in _ranked_values(t, rank, replicates, seed, epsilon):
        total += math.fsum(top)
        total_sq += math.fsum(top * top)
        flagged += short
    mean = total / replicates
    var = max(0.0, (total_sq - replicates * mean * mean) / (replicates - 1))
    return MonteCarloEstimate(mean, math.sqrt(var / replicates), flagged)


def estimate_tail_probability(threshold: float, theta, replicates: int, seed: int) -> MonteCarloEstimate:
    """Monte Carlo ``P(largest frequency > threshold)``."""
    if replicates < 1000:
        raise ValueError("need at least 1000 replicates")
    t = float(as_theta(theta))
    hits = 0
    for top, _ in _ranked_values(t, 1, replicates, seed, DEFAULT_EPSILON):
        hits += int((top > threshold).sum())
    p = hits / replicates
    return MonteCarloEstimate(p, math.sqrt(p * (1 - p) / replicates))
