"""Messages, the arithmetic sum and its distribution, shared entropy helpers.

Three iid Bernoulli(1/2) sources are summed component-wise over the
integers, so every sum component lies in {0, 1, 2, 3}.  All logarithms are
base 2.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

DEFAULT_MAX_K = 24
MAX_K_ENV = "SUMCODE_MAX_K"

_SUM_PMF = {0: Fraction(1, 8), 1: Fraction(3, 8), 2: Fraction(3, 8), 3: Fraction(1, 8)}


class DimensionError(ValueError):
    """Vectors that should share a block length do not."""


class ResourceError(RuntimeError):
    """An exhaustive computation was requested beyond its configured limit."""


def max_enumeration_k() -> int:
    """Block-length cap for exhaustive enumerations (env override allowed)."""
    raw = os.environ.get(MAX_K_ENV)
    if raw is None:
        return DEFAULT_MAX_K
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{MAX_K_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"{MAX_K_ENV} must be positive, got {value}")
    return value


@dataclass(frozen=True)
class MessageVector:
    """A length-k binary source realization."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise ValueError("message vectors need k >= 1")
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"message components must be 0 or 1: {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    def __getitem__(self, i):
        return self.bits[i]

    @classmethod
    def from_int(cls, value: int, k: int) -> "MessageVector":
        """Bit i of ``value`` becomes component i (little-endian)."""
        return cls(tuple((value >> i) & 1 for i in range(k)))


@dataclass(frozen=True)
class SumVector:
    """A realization of the component-wise sum, with its 1- and 2-counts."""

    values: tuple[int, ...]
    x: int = field(init=False)
    y: int = field(init=False)

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        if any(v not in (0, 1, 2, 3) for v in values):
            raise ValueError(f"sum components must lie in 0..3: {self.values!r}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "x", values.count(1))
        object.__setattr__(self, "y", values.count(2))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def as_int(self) -> int:
        """Base-4 integer with component i as digit i."""
        return sum(v << (2 * i) for i, v in enumerate(self.values))


@dataclass(frozen=True)
class SumClassConstants:
    x: int
    y: int
    L: int
    M: int


def _bits(v) -> tuple[int, ...]:
    return v.bits if isinstance(v, MessageVector) else MessageVector(tuple(v)).bits


def arithmetic_sum(x1, x2, x3) -> SumVector:
    """Component-wise integer sum of three equal-length binary vectors."""
    b1, b2, b3 = _bits(x1), _bits(x2), _bits(x3)
    if not len(b1) == len(b2) == len(b3):
        raise DimensionError(
            f"message lengths differ: {len(b1)}, {len(b2)}, {len(b3)}")
    return SumVector(tuple(a + b + c for a, b, c in zip(b1, b2, b3)))


def sum_component_pmf(beta: int) -> Fraction:
    """Pr(X1 + X2 + X3 = beta) for one component."""
    try:
        return _SUM_PMF[beta]
    except (KeyError, TypeError):
        raise ValueError(f"sum component must be in 0..3, got {beta!r}") from None


def sum_vector_probability(sigma: SumVector) -> Fraction:
    p = Fraction(1)
    for v in sigma:
        p *= _SUM_PMF[v]
    return p


def sum_entropy_per_component() -> float:
    """Entropy in bits of one sum component, 0.75 * (4 - log 3)."""
    return entropy(float(p) for p in _SUM_PMF.values())


def sum_class_constants(sigma: SumVector) -> SumClassConstants:
    n = sigma.x + sigma.y
    return SumClassConstants(sigma.x, sigma.y, 2 ** n, 3 ** n)


def class_size(x: int, y: int) -> tuple[int, int]:
    """(L, M) = (2^(x+y), 3^(x+y)) for a sum with x ones and y twos."""
    if x < 0 or y < 0:
        raise ValueError(f"class counts must be nonnegative: ({x}, {y})")
    return 2 ** (x + y), 3 ** (x + y)


def entropy(probs: Iterable[float]) -> float:
    """Shannon entropy in bits with 0 log 0 = 0."""
    h = 0.0
    for p in probs:
        p = float(p)
        if p > 0:
            h -= p * math.log2(p)
    return h


def entropy_from_counts(counts: Sequence[int] | np.ndarray, total: int | None = None):
    """Entropy in bits of ``counts / total``; works row-wise on 2-D arrays.

    Counts are integer label multiplicities, so the pmf is exact and only the
    logarithms are floating point.
    """
    c = np.asarray(counts, dtype=np.float64)
    if total is None:
        total = c.sum(axis=-1, keepdims=c.ndim > 1)
    total = np.asarray(total, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        clogc = np.where(c > 0, c * np.log2(np.where(c > 0, c, 1.0)), 0.0)
    h = np.log2(total).squeeze() - clogc.sum(axis=-1) / total.squeeze()
    return float(h) if np.ndim(h) == 0 else h


def log2_int(n: int) -> float:
    """log2 of a (possibly huge) positive integer."""
    if n <= 0:
        raise ValueError("log2_int needs a positive integer")
    shift = max(n.bit_length() - 64, 0)
    return math.log2(n >> shift) + shift
