import itertools
import math
from collections import defaultdict
from fractions import Fraction

import numpy as np
import pytest

from sumcode.converse import (CapacityBounds, averaged_closed_lower_bound, capacity_bounds,
                              class_weight, clumpy_counts, clumpy_distribution,
                              clumpy_entropy, clumpy_entropy_closed_lower_bound,
                              conditional_entropy_lower_bound,
                              limiting_conditional_entropy_rate, partition_by_x3,
                              partition_profile, x3_tilde)
from sumcode.core import ResourceError, SumVector, entropy, sum_entropy_per_component

LOG3 = math.log2(3)


def brute_partitions(k):
    """sigma -> x3 -> sorted list of (x1, x2), from all 2^(3k) tuples."""
    out = defaultdict(lambda: defaultdict(list))
    for bits in itertools.product((0, 1), repeat=3 * k):
        x1, x2, x3 = bits[:k], bits[k:2 * k], bits[2 * k:]
        sigma = tuple(a + b + c for a, b, c in zip(x1, x2, x3))
        out[sigma][x3].append((x1, x2))
    return out


def staircase_counts(x, y):
    """Row sums of the flush-left indicator matrix, built literally."""
    sizes = np.array(partition_profile(x, y).sizes)
    L = 2 ** (x + y)
    return (np.arange(L)[:, None] < sizes[None, :]).sum(axis=1)


def test_x3_tilde():
    assert x3_tilde(SumVector((0, 1, 2, 3))).bits == (0, 0, 1, 1)


def test_partition_example():
    parts = partition_by_x3(SumVector((1,)))
    assert parts == {(0,): [((0,), (1,)), ((1,), (0,))], (1,): [((0,), (0,))]}


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_partitions_match_brute_force(k):
    brute = brute_partitions(k)
    for sigma, groups in brute.items():
        s = SumVector(sigma)
        parts = partition_by_x3(s)
        assert {x3: sorted(v) for x3, v in parts.items()} == {x3: sorted(v) for x3, v in groups.items()}
        sizes = sorted((len(v) for v in groups.values()), reverse=True)
        assert tuple(sizes) == partition_profile(s.x, s.y).sizes
        L = 2 ** (s.x + s.y)
        assert len(groups) == L
        assert sum(sizes) == 3 ** (s.x + s.y)
        assert len(groups[x3_tilde(s).bits]) == L


def test_partition_size_guard():
    with pytest.raises(ResourceError):
        partition_by_x3(SumVector((1,) * 13))


@pytest.mark.parametrize("x, y", [(0, 0), (1, 0), (2, 1), (3, 3), (5, 2)])
def test_profile_shape(x, y):
    prof = partition_profile(x, y)
    n = x + y
    L = 2 ** n
    assert prof.total == 3 ** n
    assert len(prof.sizes) == L
    assert prof.sizes[0] == L
    assert list(prof.sizes) == sorted(prof.sizes, reverse=True)
    for u in range(n + 1):
        assert prof.sizes.count(L >> u) == math.comb(n, u)


def test_clumpy_examples():
    assert clumpy_distribution(0, 0).masses == (Fraction(1),)
    assert clumpy_distribution(1, 0).masses == (Fraction(2, 3), Fraction(1, 3))
    assert clumpy_distribution(1, 1).masses == (Fraction(4, 9), Fraction(3, 9),
                                                Fraction(1, 9), Fraction(1, 9))
    assert clumpy_distribution(0, 1).masses == clumpy_distribution(1, 0).masses


@pytest.mark.parametrize("n", range(0, 11))
def test_clumpy_counts_match_literal_staircase(n):
    for x in range(n + 1):
        assert list(staircase_counts(x, n - x)) == clumpy_counts(x, n - x)


@pytest.mark.parametrize("x, y", [(2, 1), (4, 0), (3, 3)])
def test_clumpy_shape(x, y):
    d = clumpy_distribution(x, y)
    assert sum(d.masses) == 1
    assert list(d.masses) == sorted(d.masses, reverse=True)
    # every partition is nonempty, so label 0 is used by all L of them
    assert d.masses[0] == Fraction(2 ** (x + y), 3 ** (x + y))
    assert d.masses[-1] == Fraction(1, 3 ** (x + y))
    assert d.counts() == tuple(clumpy_counts(x, y))


def test_clumpy_entropy_examples():
    assert clumpy_entropy(1, 0) == pytest.approx(LOG3 - 2 / 3, abs=1e-12)
    assert clumpy_entropy(1, 1) == pytest.approx(5 / 3 * LOG3 - 8 / 9, abs=1e-12)
    assert clumpy_entropy(0, 0) == 0.0


@pytest.mark.parametrize("n", range(0, 13))
def test_clumpy_entropy_matches_shannon(n):
    for x in (0, n // 2, n):
        y = n - x
        h = entropy(c / 3 ** n for c in staircase_counts(x, y))
        assert abs(clumpy_entropy(x, y) - h) < 1e-10


def test_closed_bound_examples():
    assert clumpy_entropy_closed_lower_bound(0, 0) == 0.0
    assert clumpy_entropy_closed_lower_bound(1, 0) == pytest.approx(2 / 3 * (LOG3 - 1), abs=1e-12)
    assert clumpy_entropy_closed_lower_bound(1, 1) == pytest.approx(16 / 9 * (LOG3 - 1) * 1.75 / 2, abs=1e-12)
    assert clumpy_entropy_closed_lower_bound(1, 1) == pytest.approx(0.909942, abs=1e-6)


@pytest.mark.parametrize("n", range(0, 13))
def test_closed_bound_below_entropy(n):
    for x in range(n + 1):
        assert clumpy_entropy_closed_lower_bound(x, n - x) <= clumpy_entropy(x, n - x) + 1e-12


def test_class_weights_sum_to_one():
    for k in (1, 4, 9):
        assert sum(class_weight(k, x, y) for x in range(k + 1) for y in range(k + 1 - x)) == 1


def test_class_weight_by_enumeration():
    k = 3
    counts = defaultdict(int)
    for bits in itertools.product((0, 1), repeat=3 * k):
        sigma = [bits[i] + bits[k + i] + bits[2 * k + i] for i in range(k)]
        counts[(sigma.count(1), sigma.count(2))] += 1
    for (x, y), c in counts.items():
        assert class_weight(k, x, y) == Fraction(c, 8 ** k)


def test_single_component_average():
    direct = sum(p * clumpy_entropy_closed_lower_bound(int(b == 1), int(b == 2))
                 for b, p in enumerate((1 / 8, 3 / 8, 3 / 8, 1 / 8)))
    assert conditional_entropy_lower_bound(1) == pytest.approx(direct, abs=1e-12)


@pytest.mark.parametrize("k", [1, 2, 5, 10, 25])
def test_average_matches_closed_form(k):
    assert averaged_closed_lower_bound(k) == pytest.approx(conditional_entropy_lower_bound(k),
                                                           rel=1e-9, abs=1e-12)


def test_conditional_rate_convergence():
    limit = limiting_conditional_entropy_rate()
    assert limit == pytest.approx(0.75 * (LOG3 - 1), abs=1e-15)
    assert limit == pytest.approx(0.438722, abs=1e-6)
    assert abs(conditional_entropy_lower_bound(50) / 50 - limit) / limit < 1e-2
    assert abs(conditional_entropy_lower_bound(500) / 500 - limit) / limit < 1e-4
    rates = [conditional_entropy_lower_bound(k) / k for k in (1, 2, 5, 20)]
    assert rates == sorted(rates)
    with pytest.raises(ValueError):
        conditional_entropy_lower_bound(0)


def test_capacity_bounds_binary():
    b = capacity_bounds()
    assert isinstance(b, CapacityBounds)
    assert round(b.lower, 4) == 0.8
    assert round(b.upper, 4) == 0.8889
    assert b.lower < b.upper
    assert abs(sum_entropy_per_component() + limiting_conditional_entropy_rate() - 2.25) < 1e-12


def test_capacity_bounds_other_alphabets():
    assert capacity_bounds(3).lower is None
    assert capacity_bounds(2, hn_en=0.1).upper == pytest.approx(2 / 2.25 + 0.1)
    assert capacity_bounds(4, hn_en=0.1).upper == pytest.approx(2 / 2.25 + 0.05)
    with pytest.raises(ValueError):
        capacity_bounds(1)
    with pytest.raises(ValueError):
        capacity_bounds(2, k=10)


def test_finite_k_capacity_bound_decreases_to_limit():
    ups = [capacity_bounds(k=k, hn_en=0.0).upper for k in (1, 10, 100, 10_000)]
    assert ups == sorted(ups, reverse=True)
    assert ups[-1] == pytest.approx(2 / 2.25, rel=1e-4)
    assert all(u >= 2 / 2.25 for u in ups)
