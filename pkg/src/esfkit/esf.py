"""Ewens sampling formula and the quantities derived from it.

Small samples (``n <= EXACT_THRESHOLD`` with a rational mutation parameter)
are evaluated in exact rational arithmetic; everything else falls back to
log-space floating point.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Mapping, NamedTuple, Sequence, Union

EXACT_THRESHOLD = 100

Number = Union[Fraction, float]


def as_theta(value) -> Number:
    """Parse a mutation parameter.

    Strings, ints and Fractions become exact rationals ("0.5" -> 1/2).
    Floats are read through their shortest decimal repr, so ``0.1`` is 1/10.
    Non-finite and non-positive values are rejected.
    """
    if isinstance(value, bool):
        raise TypeError("theta must be numeric")
    if isinstance(value, Fraction):
        theta = value
    elif isinstance(value, int):
        theta = Fraction(value)
    elif isinstance(value, str):
        try:
            theta = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse theta {value!r}") from exc
    else:
        x = float(value)
        if not math.isfinite(x):
            raise ValueError("theta must be finite")
        theta = Fraction(repr(x))
    if theta <= 0:
        raise ValueError("theta must be positive (theta = 0 makes the sampling formula undefined)")
    return theta


def _exact(theta: Number, n: int) -> bool:
    return isinstance(theta, Fraction) and n <= EXACT_THRESHOLD


@dataclass(frozen=True)
class ExactProbability:
    """A probability together with how it was computed."""

    value: Number
    representation: str  # "exact-rational" or "log-space"
    formula_id: str

    def __post_init__(self):
        if not (-1e-12 <= self.value <= 1 + 1e-12):
            raise ValueError(f"probability out of range: {self.value}")

    def __float__(self) -> float:
        return float(self.value)

    @property
    def is_exact(self) -> bool:
        return self.representation == "exact-rational"


def _prob(value, formula_id: str) -> ExactProbability:
    rep = "exact-rational" if isinstance(value, Fraction) else "log-space"
    return ExactProbability(value, rep, formula_id)


@dataclass(frozen=True)
class AllelicPartition:
    """Allele-count vector ``(a_1, ..., a_n)``: ``a_i`` alleles seen exactly ``i`` times."""

    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise ValueError("allele counts must be non-negative")
        n = sum(i * c for i, c in enumerate(counts, 1))
        if n < 1:
            raise ValueError("a partition must describe at least one gene")
        if any(counts[n:]):
            raise ValueError("counts beyond index n must be zero")
        counts = counts[:n] + (0,) * (n - len(counts))
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "AllelicPartition":
        """Build from the list of allele class sizes, e.g. ``[2, 1, 1]``."""
        sizes = [int(s) for s in sizes]
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError("class sizes must be positive")
        n = sum(sizes)
        counts = [0] * n
        for s in sizes:
            counts[s - 1] += 1
        return cls(tuple(counts))

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def k(self) -> int:
        return sum(self.counts)

    def sizes(self) -> list[int]:
        """Class sizes in decreasing order."""
        return [i for i in range(self.n, 0, -1) for _ in range(self.counts[i - 1])]

    def to_json(self) -> list[int]:
        return list(self.counts)


def as_partition(p) -> AllelicPartition:
    if isinstance(p, AllelicPartition):
        return p
    return AllelicPartition(tuple(p))


def partitions(n: int) -> Iterator[AllelicPartition]:
    """All partitions of ``n`` in colexicographic order of ``(a_n, ..., a_1)``."""
    if n < 1:
        raise ValueError("n must be positive")
    return iter(_partitions(n))


@lru_cache(maxsize=64)
def _partitions(n: int) -> tuple:
    def gen(rem, largest):
        if rem == 0:
            yield ()
            return
        for s in range(min(rem, largest), 0, -1):
            for rest in gen(rem - s, s):
                yield (s,) + rest

    parts = [AllelicPartition.from_sizes(sizes) for sizes in gen(n, n)]
    parts.sort(key=lambda p: p.counts[::-1])
    return tuple(parts)


def rising_factorial(theta, n: int) -> Number:
    """``theta (theta+1) ... (theta+n-1)``."""
    if n < 1:
        raise ValueError("rising factorial needs n >= 1")
    theta = as_theta(theta)
    if _exact(theta, n):
        out = Fraction(1)
        for i in range(n):
            out *= theta + i
        return out
    try:
        return math.exp(log_rising_factorial(theta, n))
    except OverflowError:
        return math.inf


def log_rising_factorial(theta, n: int) -> float:
    theta = float(as_theta(theta)) if not isinstance(theta, float) else theta
    if n < 1:
        raise ValueError("rising factorial needs n >= 1")
    if n <= 64:
        return math.fsum(math.log(theta + i) for i in range(n))
    return math.lgamma(theta + n) - math.lgamma(theta)


@lru_cache(maxsize=None)
def _stirling_row(n: int) -> tuple:
    # unsigned Stirling numbers of the first kind, |s(n, k)| for k = 0..n
    if n == 0:
        return (1,)
    prev = _stirling_row(n - 1)
    row = [0] * (n + 1)
    for k in range(1, n + 1):
        row[k] = prev[k - 1] + (n - 1) * (prev[k] if k < n else 0)
    return tuple(row)


def stirling1(n: int, k: int) -> int:
    """Unsigned Stirling number of the first kind."""
    if n < 0 or k < 0:
        raise ValueError("arguments must be non-negative")
    if k > n:
        return 0
    if n > 2000:
        raise ValueError("n too large for the exact Stirling table")
    for m in range(0, n, 200):  # fill the cache iteratively to stay off the recursion limit
        _stirling_row(m)
    return _stirling_row(n)[k]


def _log_partition_weight(p: AllelicPartition) -> float:
    # log of 1^a1 2^a2 ... n^an a1! ... an!
    return math.fsum(c * math.log(j) + math.lgamma(c + 1) for j, c in enumerate(p.counts, 1) if c)


def esf_probability(p, theta) -> ExactProbability:
    """Stationary probability of the allelic partition ``p``."""
    p = as_partition(p)
    theta = as_theta(theta)
    n, k = p.n, p.k
    if _exact(theta, n):
        denom = 1
        for j, c in enumerate(p.counts, 1):
            if c:
                denom *= j**c * math.factorial(c)
        value = Fraction(math.factorial(n)) * theta**k / (denom * rising_factorial(theta, n))
        return _prob(value, "esf")
    t = float(theta)
    log_value = math.lgamma(n + 1) + k * math.log(t) - _log_partition_weight(p) - log_rising_factorial(t, n)
    return _prob(math.exp(log_value), "esf")


def esf_distribution(n: int, theta) -> dict:
    """``{partition: probability value}`` over every partition of ``n``."""
    return {p: esf_probability(p, theta).value for p in partitions(n)}


def k_distribution(n: int, theta) -> dict:
    """Law of the number of distinct alleles ``K`` in a sample of ``n`` genes."""
    if n < 1:
        raise ValueError("n must be positive")
    theta = as_theta(theta)
    if _exact(theta, n):
        total = rising_factorial(theta, n)
        return {k: _prob(stirling1(n, k) * theta**k / total, "k-distribution") for k in range(1, n + 1)}
    t = float(theta)
    log_total = log_rising_factorial(t, n)
    out = {}
    for k in range(1, n + 1):
        s = stirling1(n, k)
        out[k] = _prob(math.exp(math.log(s) + k * math.log(t) - log_total), "k-distribution")
    return out


def expected_k(n: int, theta) -> Number:
    return sum(k * pk.value for k, pk in k_distribution(n, theta).items())


def expected_k_closed_form(n: int, theta: float) -> float:
    """``sum_{i<n} theta/(theta+i)``; equal to :func:`expected_k`, cheap enough for root finding."""
    return math.fsum(theta / (theta + i) for i in range(n))


def conditional_partition_given_k(p, k: int) -> ExactProbability:
    """Probability of ``p`` given ``K = k``; free of theta.

    Evaluated as a ratio at two different mutation parameters, which must agree.
    """
    p = as_partition(p)
    if p.k != k:
        raise ValueError(f"partition has {p.k} alleles, not k={k}")
    values = []
    for theta in (Fraction(1), Fraction(2)):
        num = esf_probability(p, theta).value
        den = k_distribution(p.n, theta)[k].value
        values.append(num / den)
    a, b = values
    if isinstance(a, Fraction):
        if a != b:
            raise ArithmeticError("conditional law depends on theta")
    elif abs(a - b) > 1e-12 * max(abs(a), abs(b)):
        raise ArithmeticError("conditional law depends on theta")
    return _prob(a, "esf-given-k")


class CheckResult(NamedTuple):
    passed: bool
    max_residual: float


def _keyed(dist: Mapping) -> tuple[int, dict]:
    out = {}
    n = None
    for key, value in dist.items():
        p = as_partition(key)
        if n is None:
            n = p.n
        elif p.n != n:
            raise ValueError("distribution mixes sample sizes")
        out[p.counts] = value
    if n is None:
        raise ValueError("empty distribution")
    total = sum(out.values())
    if abs(total - 1) > 1e-12:
        raise ValueError(f"distribution is not normalised (sum = {float(total)})")
    return n, out


def check_consistency_recursion(dist_n: Mapping, dist_n1: Mapping, tol: float = 1e-10) -> CheckResult:
    """Check the sampling-consistency relation between sizes ``n`` and ``n+1``.

    Each size-``n`` probability must equal the chance of reaching that
    partition by deleting one uniformly chosen gene from a size-``n+1`` sample.
    """
    n, pn = _keyed(dist_n)
    m, pn1 = _keyed(dist_n1)
    if m != n + 1:
        raise ValueError("second distribution must be over partitions of n+1")
    worst = 0
    for part in partitions(n):
        a = list(part.counts) + [0]
        up = a[:]
        up[0] += 1
        rhs = Fraction(a[0] + 1, n + 1) * pn1.get(tuple(up), 0)
        for j in range(2, n + 2):
            if a[j - 2] == 0:
                continue
            b = a[:]
            b[j - 2] -= 1
            b[j - 1] += 1
            rhs += Fraction(j * (a[j - 1] + 1), n + 1) * pn1.get(tuple(b), 0)
        worst = max(worst, abs(pn.get(part.counts, 0) - rhs))
    return CheckResult(bool(worst <= tol), float(worst))


def check_noninterference(n: int, theta, tol: float = 1e-10) -> CheckResult:
    """Remove the allelic class of a random gene; the rest must again follow the ESF.

    For every removed class size ``r < n`` the conditional law of the
    remaining ``n - r`` genes is compared (total variation) with the ESF at
    sample size ``n - r``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    theta = as_theta(theta)
    joint: dict = {}
    for part, prob in esf_distribution(n, theta).items():
        for r, c in enumerate(part.counts, 1):
            if not c or r == n:
                continue
            rest = list(part.counts)
            rest[r - 1] -= 1
            key = AllelicPartition(tuple(rest[: n - r]))
            weight = Fraction(r * c, n) if isinstance(prob, Fraction) else r * c / n
            joint.setdefault(r, Counter())[key] += prob * weight
    worst = 0
    for r, table in joint.items():
        mass = sum(table.values())
        target = esf_distribution(n - r, theta)
        tv = sum(abs(table.get(q, 0) / mass - target[q]) for q in target) / 2
        worst = max(worst, tv)
    return CheckResult(bool(worst <= tol), float(worst))
