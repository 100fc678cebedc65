"""Converse machinery: x3-partitions, the clumpy distribution and its entropy.

For a sum realization with x ones and y twos there are M = 3^(x+y) input
tuples, split by their x3 value into L = 2^(x+y) partitions.  Labels must be
distinct within a partition, and the entropy-minimizing way to reuse labels
across partitions stacks every partition's indicator vector flush left
(a staircase); the row sums of that staircase give the clumpy pmf.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .core import (MessageVector, ResourceError, SumVector, class_size, entropy, log2_int,
                   sum_entropy_per_component)

LOG3 = math.log2(3)
MAX_CLASS = 30
MAX_PARTITION_K = 12


@dataclass(frozen=True)
class PartitionProfile:
    x: int
    y: int
    sizes: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.sizes)


@dataclass(frozen=True)
class ClumpyDistribution:
    x: int
    y: int
    masses: tuple[Fraction, ...]

    @property
    def L(self) -> int:
        return len(self.masses)

    @property
    def M(self) -> int:
        return 3 ** (self.x + self.y)

    def counts(self) -> tuple[int, ...]:
        """Masses scaled by M (label multiplicities)."""
        return tuple(int(m * self.M) for m in self.masses)

    def entropy(self) -> float:
        return entropy(self.masses)


def x3_tilde(sigma: SumVector) -> MessageVector:
    """x3 value owning the largest partition: 0 where sigma<=1, else 1."""
    return MessageVector(tuple(0 if v <= 1 else 1 for v in sigma))


def partition_by_x3(sigma: SumVector) -> dict[tuple[int, ...], list[tuple[tuple[int, ...], tuple[int, ...]]]]:
    """Group every (x1, x2, x3) with sum ``sigma`` by its x3 value."""
    k = len(sigma)
    if k > MAX_PARTITION_K:
        raise ResourceError(f"partition enumeration is limited to k <= {MAX_PARTITION_K}")
    parts: dict[tuple[int, ...], list] = {}
    # x3(i) is free only where sigma(i) is 1 or 2; x1 + x2 = sigma - x3 must lie in 0..2
    choices = [(0,) if v == 0 else (1,) if v == 3 else (0, 1) for v in sigma]
    for x3 in itertools.product(*choices):
        pair_options = []
        for s, b in zip(sigma, x3):
            r = s - b
            pair_options.append([(a, r - a) for a in (0, 1) if 0 <= r - a <= 1])
        pairs = []
        for combo in itertools.product(*pair_options):
            x1 = tuple(c[0] for c in combo)
            x2 = tuple(c[1] for c in combo)
            pairs.append((x1, x2))
        parts[x3] = pairs
    return parts


def partition_profile(x: int, y: int) -> PartitionProfile:
    """Sorted partition sizes: C(x+y, u) partitions of size L / 2^u."""
    L, _ = class_size(x, y)
    n = x + y
    sizes = []
    for u in range(n + 1):
        sizes.extend([L >> u] * comb(n, u))
    return PartitionProfile(x, y, tuple(sizes))


def clumpy_counts(x: int, y: int) -> list[int]:
    """M * p_star: entry j counts the partitions with more than j elements.

    Column sums of the staircase, so no L x L matrix is formed.
    """
    n = x + y
    L = 2 ** n
    counts = [0] * L
    for u in range(n + 1):
        c = comb(n, u)
        for col in range(L >> u):
            counts[col] += c
    return counts


def clumpy_distribution(x: int, y: int) -> ClumpyDistribution:
    if x < 0 or y < 0:
        raise ValueError("class counts must be nonnegative")
    if x + y > MAX_CLASS:
        raise ResourceError(f"clumpy distribution needs x+y <= {MAX_CLASS}")
    M = 3 ** (x + y)
    return ClumpyDistribution(x, y, tuple(Fraction(c, M) for c in clumpy_counts(x, y)))


def clumpy_entropy(x: int, y: int) -> float:
    """Entropy of p_star grouped by label multiplicity.

    ceil(2^(n-j)) labels occur S_j = sum_{s<j} C(n, s) times each, for
    j = 1..n+1 with n = x+y.
    """
    n = x + y
    M = 3 ** n
    total = 0.0
    partial = 0
    for j in range(1, n + 2):
        partial += comb(n, j - 1)
        labels = 2 ** (n - j) if j <= n else 1
        total += labels * partial * (n * LOG3 - log2_int(partial))
    return total / M


def clumpy_entropy_closed_lower_bound(x: int, y: int) -> float:
    """(x+y) (L/M) (log 3 - 1) ((3/2)^(x+y) - 1/2)."""
    n = x + y
    return n * (2 / 3) ** n * (LOG3 - 1) * (1.5 ** n - 0.5)


def class_weight(k: int, x: int, y: int) -> Fraction:
    """Pr(sum has exactly x ones and y twos) for block length k."""
    rest = k - x - y
    ways = math.factorial(k) // (math.factorial(x) * math.factorial(y) * math.factorial(rest))
    return ways * 2 ** rest * Fraction(1, 8) ** rest * Fraction(3, 8) ** (x + y)


def averaged_closed_lower_bound(k: int) -> float:
    """Direct sum over (x, y) of class probability times the closed bound."""
    total = 0.0
    for x in range(k + 1):
        for y in range(k + 1 - x):
            total += float(class_weight(k, x, y)) * clumpy_entropy_closed_lower_bound(x, y)
    return total


def conditional_entropy_lower_bound(k: int) -> float:
    """Closed form (log 3 - 1) k (3/4 - (1/3)(3/4)^k)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return (LOG3 - 1) * k * (0.75 - 0.75 ** k / 3)


def limiting_conditional_entropy_rate() -> float:
    return 0.75 * (LOG3 - 1)


@dataclass(frozen=True)
class CapacityBounds:
    lower: float | None
    upper: float


def capacity_bounds(alphabet_size: int = 2, *, k: int | None = None,
                    hn_en: float | None = None) -> CapacityBounds:
    """Achievable rate and converse bound on the computation capacity.

    By default the upper bound is the limit 2 / 2.25.  Passing ``k`` and a
    bound ``hn_en`` on H(N)/E N gives the finite-k converse
    ``hn_en / log|Z| + 2k / (H(Sigma) + H_lb(k))`` instead.  The lower bound
    comes from the binary scheme and is None for other alphabets.
    """
    if alphabet_size < 2:
        raise ValueError("alphabet needs at least two symbols")
    lower = 2 / 2.5 if alphabet_size == 2 else None
    if k is None:
        # H(Sigma)/k + 0.75 (log 3 - 1) = 2.25 exactly
        upper = 2 / 2.25
        if hn_en is not None:
            upper += hn_en / math.log2(alphabet_size)
    else:
        if hn_en is None:
            raise ValueError("a finite-k bound needs hn_en, a bound on H(N)/E N")
        denom = k * sum_entropy_per_component() + conditional_entropy_lower_bound(k)
        upper = hn_en / math.log2(alphabet_size) + 2 * k / denom
    return CapacityBounds(lower, upper)
