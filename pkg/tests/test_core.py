import itertools
import math
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sumcode.core import (DEFAULT_MAX_K, DimensionError, MessageVector, SumVector,
                          arithmetic_sum, entropy, entropy_from_counts, max_enumeration_k,
                          sum_class_constants, sum_component_pmf, sum_entropy_per_component,
                          sum_vector_probability)


def test_arithmetic_sum_examples():
    s = arithmetic_sum((0,), (0,), (0,))
    assert s.values == (0,) and (s.x, s.y) == (0, 0)
    s = arithmetic_sum((1,), (1,), (1,))
    assert s.values == (3,) and (s.x, s.y) == (0, 0)
    s = arithmetic_sum((1, 0), (0, 1), (1, 1))
    assert s.values == (2, 2) and (s.x, s.y) == (0, 2)


def test_arithmetic_sum_rejects_length_mismatch():
    with pytest.raises(DimensionError):
        arithmetic_sum((1, 0), (1,), (0, 0))


def test_message_vector_validates():
    with pytest.raises(ValueError):
        MessageVector((0, 2))
    with pytest.raises(ValueError):
        MessageVector(())
    assert MessageVector.from_int(0b110, 3).bits == (0, 1, 1)


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1), st.integers(0, 1)),
                min_size=1, max_size=40))
def test_sum_counts_match_values(triples):
    x1, x2, x3 = zip(*triples)
    s = arithmetic_sum(x1, x2, x3)
    assert s.values == tuple(a + b + c for a, b, c in triples)
    assert s.x == s.values.count(1) and s.y == s.values.count(2)
    assert s.x + s.y <= len(s)


def test_sum_component_pmf():
    assert sum_component_pmf(0) == Fraction(1, 8)
    assert sum_component_pmf(3) == Fraction(1, 8)
    assert sum_component_pmf(1) == Fraction(3, 8)
    assert sum_component_pmf(2) == Fraction(3, 8)
    assert sum(sum_component_pmf(b) for b in range(4)) == 1
    with pytest.raises(ValueError):
        sum_component_pmf(4)
    with pytest.raises(ValueError):
        sum_component_pmf(-1)


def test_pmf_matches_enumeration():
    counts = Counter(a + b + c for a, b, c in itertools.product((0, 1), repeat=3))
    for beta, n in counts.items():
        assert sum_component_pmf(beta) == Fraction(n, 8)


def test_sum_entropy_value():
    h = sum_entropy_per_component()
    assert abs(h - 1.8113) < 1e-4
    assert abs(h - 0.75 * (4 - math.log2(3))) < 1e-12


def test_sum_entropy_additive_over_components():
    k = 3
    dist = Counter()
    for bits in itertools.product((0, 1), repeat=3 * k):
        sigma = tuple(bits[i] + bits[k + i] + bits[2 * k + i] for i in range(k))
        dist[sigma] += 1
    total = 2 ** (3 * k)
    assert abs(entropy(n / total for n in dist.values()) - k * sum_entropy_per_component()) < 1e-12


def test_entropy_identity():
    assert abs(sum_entropy_per_component() + 0.75 * (math.log2(3) - 1) - 2.25) < 1e-12


@pytest.mark.parametrize("values, L, M", [((0,), 1, 1), ((1,), 2, 3), ((1, 2), 4, 9),
                                          ((3, 0, 2, 1), 4, 9)])
def test_sum_class_constants(values, L, M):
    c = sum_class_constants(SumVector(values))
    assert (c.L, c.M) == (L, M)
    assert c.L <= c.M


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_tuple_count_per_sum_is_M(k):
    counts = Counter()
    for x1, x2, x3 in itertools.product(itertools.product((0, 1), repeat=k), repeat=3):
        counts[arithmetic_sum(x1, x2, x3).values] += 1
    assert len(counts) == 4 ** k
    for values, n in counts.items():
        assert n == sum_class_constants(SumVector(values)).M


@pytest.mark.parametrize("k", [1, 2, 3])
def test_sum_probability_is_product_of_component_pmfs(k):
    counts = Counter()
    for x1, x2, x3 in itertools.product(itertools.product((0, 1), repeat=k), repeat=3):
        counts[arithmetic_sum(x1, x2, x3).values] += 1
    for values, n in counts.items():
        assert sum_vector_probability(SumVector(values)) == Fraction(n, 8 ** k)


def test_entropy_from_counts_rowwise():
    rows = [[2, 1], [1, 2], [3, 0]]
    h = entropy_from_counts(rows, 3)
    assert h[0] == pytest.approx(entropy([2 / 3, 1 / 3]), abs=1e-12)
    assert h[2] == pytest.approx(0.0, abs=1e-12)


def test_max_enumeration_k_env(monkeypatch):
    monkeypatch.delenv("SUMCODE_MAX_K", raising=False)
    assert max_enumeration_k() == DEFAULT_MAX_K == 24
    monkeypatch.setenv("SUMCODE_MAX_K", "10")
    assert max_enumeration_k() == 10
    monkeypatch.setenv("SUMCODE_MAX_K", "ten")
    with pytest.raises(ValueError):
        max_enumeration_k()
