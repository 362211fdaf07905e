"""Distribution of the number of sample genes still carrying the allele of the sample's MRCA ("Eve")."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .esf import EXACT_THRESHOLD, Number, as_theta


@dataclass(frozen=True)
class EveDistribution:
    n: int
    theta: Number
    q: tuple  # q[j] = P(Y_n = j), j = 0..n

    def __post_init__(self):
        if len(self.q) != self.n + 1:
            raise ValueError("q must have n+1 entries")
        total = sum(self.q)
        if abs(total - 1) > 1e-12:
            raise ValueError(f"q is not normalised (sum {float(total)})")

    def mean(self) -> Number:
        return sum(j * p for j, p in enumerate(self.q))


def all_eve_probability(n: int, theta) -> Number:
    """``q_n(n)``: every sample gene carries Eve's allele (equivalently, the oldest allele's)."""
    theta = as_theta(theta)
    if not (isinstance(theta, Fraction) and n <= EXACT_THRESHOLD):
        theta = float(theta)
    out = Fraction(1) if isinstance(theta, Fraction) else 1.0
    for k in range(2, n + 1):
        out *= (k - 1) / (k + theta - 1)
    return out


@lru_cache(maxsize=64)
def _table(n: int, theta: Number) -> tuple:
    # rows[m] = (q_m(0), ..., q_m(m)); solved for m ascending, j descending, so
    # every right-hand-side term is already known.
    rows = [None, (0 * theta, 1 + 0 * theta)]
    for m in range(2, n + 1):
        prev = rows[m - 1]

        def q_prev(j):
            return prev[j] if 0 <= j <= m - 1 else 0

        q = [0] * (m + 2)  # q[m+1] = 0 pads the (j+1) term at j = m
        for j in range(m, -1, -1):
            rhs = m * (j - 1) * q_prev(j - 1) + m * (m - j - 1) * q_prev(j) + (j + 1) * theta * q[j + 1]
            q[j] = rhs / (m * (m - 1) + j * theta)
        rows.append(tuple(q[: m + 1]))
    return tuple(rows)


def solve_eve_recurrence(n: int, theta) -> EveDistribution:
    if n < 1:
        raise ValueError("n must be positive")
    theta = as_theta(theta)
    if not (isinstance(theta, Fraction) and n <= EXACT_THRESHOLD):
        theta = float(theta)
    return EveDistribution(n, theta, _table(n, theta)[n])


def expected_eve_count(n: int, theta) -> Number:
    """Mean number of sample genes of Eve's allelic type."""
    if n < 1:
        raise ValueError("n must be positive")
    theta = as_theta(theta)
    if not (isinstance(theta, Fraction) and n <= EXACT_THRESHOLD):
        theta = float(theta)
    out = Fraction(n) if isinstance(theta, Fraction) else float(n)
    for j in range(2, n + 1):
        out *= j * (j - 1) / (j * (j - 1) + theta)
    return out


def eve_extinction_bounds(theta) -> tuple[float, float]:
    """Lower and upper bounds on the large-sample probability that Eve's allele is lost."""
    t = float(as_theta(theta))
    lower = t * t / ((2 + t) * (1 + t))
    upper = (t * math.expm1(t)) / (t * math.exp(t) + 1)
    return lower, upper
