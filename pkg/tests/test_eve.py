import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from esfkit.coalescent import simulate_ima
from esfkit.esf import as_theta
from esfkit.eve import (
    EveDistribution,
    all_eve_probability,
    eve_extinction_bounds,
    expected_eve_count,
    solve_eve_recurrence,
)
from esfkit.gem import all_same_type_probabilities

F = Fraction


def test_small_cases():
    assert solve_eve_recurrence(1, "0.7").q == (0, 1)
    assert solve_eve_recurrence(2, 1).q == (F(1, 6), F(1, 3), F(1, 2))
    t = F(3, 7)
    q = solve_eve_recurrence(2, t).q
    assert q[2] == 1 / (1 + t)
    assert (2 + t) * q[1] == 2 * t * q[2]
    assert 2 * q[0] == t * q[1]


def test_q2_zero_equals_lower_bound_expression():
    for t in ("0.5", "1", "2"):
        th = as_theta(t)
        assert solve_eve_recurrence(2, t).q[0] == th * th / ((2 + th) * (1 + th))


def test_expected_count_examples():
    assert expected_eve_count(2, 1) == F(4, 3)
    assert expected_eve_count(1, 5) == 1
    assert expected_eve_count(3, 1) == F(12, 7)


@pytest.mark.parametrize("theta", ["0.5", "1", "2"])
def test_mean_matches_product_formula(theta):
    for n in range(1, 31):
        assert solve_eve_recurrence(n, theta).mean() == expected_eve_count(n, theta)


@given(st.integers(1, 25), st.fractions(min_value=F(1, 10), max_value=10, max_denominator=20))
def test_all_eve_probability(n, theta):
    d = solve_eve_recurrence(n, theta)
    assert sum(d.q) == 1
    assert d.q[n] == all_eve_probability(n, theta) == all_same_type_probabilities(n, theta)[1]


@pytest.mark.parametrize("theta", ["0.5", "1", "2"])
def test_extinction_probability_increases_and_is_bounded(theta):
    zeros = [solve_eve_recurrence(n, theta).q[0] for n in range(2, 41)]
    assert all(a <= b for a, b in zip(zeros, zeros[1:]))
    lo, hi = eve_extinction_bounds(theta)
    assert all(lo - 1e-15 <= float(z) <= hi for z in zeros)
    assert all(float(z) > lo for z in zeros[1:])


def test_bounds_examples():
    lo, hi = eve_extinction_bounds(1)
    assert math.isclose(lo, 1 / 6) and math.isclose(hi, (math.e - 1) / (math.e + 1))
    lo, hi = eve_extinction_bounds(2)
    assert math.isclose(lo, 1 / 3)
    # substituting theta = 2 into theta (e^theta - 1) / (theta e^theta + 1)
    assert math.isclose(hi, (2 * math.e**2 - 2) / (2 * math.e**2 + 1))
    lo, hi = eve_extinction_bounds(1e-6)
    assert lo < 1e-11 and hi < 1e-11


def test_float_mode():
    d = solve_eve_recurrence(150, 1.3)
    assert isinstance(d.q[0], float) and math.isclose(sum(d.q), 1.0, rel_tol=1e-12)
    assert math.isclose(d.mean(), expected_eve_count(150, 1.3), rel_tol=1e-10)


def test_distribution_validation():
    with pytest.raises(ValueError):
        EveDistribution(2, 1, (0.5, 0.5))
    with pytest.raises(ValueError):
        EveDistribution(1, 1, (0.5, 0.4))


@pytest.mark.parametrize("n", [2, 5])
def test_monte_carlo_cells(n):
    b = simulate_ima(n, 1, 100_000, seed=40 + n)
    q = np.array([float(v) for v in solve_eve_recurrence(n, 1).q])
    freq = np.bincount(b.y_n, minlength=n + 1) / 1e5
    assert np.all(np.abs(freq - q) <= 3 * np.sqrt(q * (1 - q) / 1e5))
