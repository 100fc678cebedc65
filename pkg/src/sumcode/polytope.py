"""The label-distribution family, its extreme point p_star, and friends.

A family member is ``(1/M) sum_i e_i`` where ``e_i`` is any 0/1 vector of
length L with ``n_i`` ones (``n_i`` the size of the i-th x3-partition).
Masses are kept as integer counts over the common denominator M, so every
comparison below is exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import ResourceError, entropy, entropy_from_counts
from .converse import clumpy_counts, partition_profile

MAX_SAMPLE_CLASS = 20
MAX_ENUM_CLASS = 2


class DecompositionError(ArithmeticError):
    """The swap-and-mix decomposition could not express the target through permuted p_star."""


@dataclass(frozen=True)
class LabelFamilyVector:
    masses: tuple[Fraction, ...]
    witnesses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        L = len(self.masses)
        if len(self.witnesses) != L:
            raise ValueError("need one indicator vector per partition")
        M = sum(sum(e) for e in self.witnesses)
        summed = [sum(col) for col in zip(*self.witnesses)]
        if tuple(Fraction(c, M) for c in summed) != tuple(self.masses):
            raise ValueError("masses are not the normalized sum of the witnesses")

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.witnesses))

    def entropy(self) -> float:
        return entropy(self.masses)


@dataclass(frozen=True)
class DecompositionAtom:
    permutation: tuple[int, ...]
    weight: Fraction

    def apply(self, pstar: Sequence) -> tuple:
        """The permuted vector: entry k is ``pstar[permutation[k]]``."""
        return tuple(pstar[i] for i in self.permutation)


@dataclass(frozen=True)
class Decomposition:
    atoms: tuple[DecompositionAtom, ...]
    iterations: int

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def reconstruct(self, pstar: Sequence[Fraction]) -> tuple[Fraction, ...]:
        # integer numerators over one common denominator, then a single division
        pstar = [Fraction(v) for v in pstar]
        dp = math.lcm(*(v.denominator for v in pstar))
        dw = math.lcm(*(a.weight.denominator for a in self.atoms)) if self.atoms else 1
        ps = [v.numerator * (dp // v.denominator) for v in pstar]
        out = [0] * len(pstar)
        for atom in self.atoms:
            w = atom.weight.numerator * (dw // atom.weight.denominator)
            for k, i in enumerate(atom.permutation):
                out[k] += w * ps[i]
        return tuple(Fraction(v, dp * dw) for v in out)


@dataclass(frozen=True)
class FloorConstrainedPmf:
    c: float
    u: int
    masses: tuple[float, ...]


def _profile_groups(x: int, y: int) -> list[tuple[int, int]]:
    """(size, multiplicity) pairs of the partition profile."""
    sizes = partition_profile(x, y).sizes
    return [(s, len(list(g))) for s, g in itertools.groupby(sizes)]


def sample_family_counts(x: int, y: int, size: int, rng: np.random.Generator,
                         chunk: int = 10_000) -> np.ndarray:
    """``size`` family members as an integer array of label counts (M * p).

    Each e_i is a uniformly random n_i-subset of the L labels: the labels
    holding the n_i smallest of L iid uniform keys.
    """
    if x + y > MAX_SAMPLE_CLASS:
        raise ResourceError(f"sampling is limited to x+y <= {MAX_SAMPLE_CLASS}")
    L = 2 ** (x + y)
    groups = _profile_groups(x, y)
    out = np.empty((size, L), dtype=np.int64)
    for start in range(0, size, chunk):
        b = min(chunk, size - start)
        counts = np.zeros((b, L), dtype=np.int64)
        for n_i, mult in groups:
            if n_i == L:
                counts += mult
                continue
            keys = rng.random((b, mult, L))
            kth = np.partition(keys, n_i - 1, axis=-1)[..., n_i - 1:n_i]
            counts += (keys <= kth).sum(axis=1)
        out[start:start + b] = counts
    return out


def sample_family_member(x: int, y: int, seed: int | np.random.Generator | None = None
                         ) -> LabelFamilyVector:
    rng = np.random.default_rng(seed)
    if x + y > MAX_SAMPLE_CLASS:
        raise ResourceError(f"sampling is limited to x+y <= {MAX_SAMPLE_CLASS}")
    sizes = partition_profile(x, y).sizes
    L, M = 2 ** (x + y), 3 ** (x + y)
    witnesses = []
    for n_i in sizes:
        e = np.zeros(L, dtype=np.int64)
        e[rng.choice(L, size=n_i, replace=False)] = 1
        witnesses.append(tuple(e.tolist()))
    counts = [sum(col) for col in zip(*witnesses)]
    return LabelFamilyVector(tuple(Fraction(c, M) for c in counts), tuple(witnesses))


def enumerate_family(x: int, y: int) -> set[tuple[Fraction, ...]]:
    """Every distinct mass vector in the family (tiny classes only)."""
    if x + y > MAX_ENUM_CLASS:
        raise ResourceError(
            f"family enumeration is limited to x+y <= {MAX_ENUM_CLASS}; use sampling")
    sizes = partition_profile(x, y).sizes
    L, M = 2 ** (x + y), 3 ** (x + y)
    options = [list(itertools.combinations(range(L), n_i)) for n_i in sizes]
    members = set()
    for choice in itertools.product(*options):
        counts = [0] * L
        for subset in choice:
            for label in subset:
                counts[label] += 1
        members.add(tuple(Fraction(c, M) for c in counts))
    return members


def family_witness_count(x: int, y: int) -> int:
    L = 2 ** (x + y)
    return math.prod(math.comb(L, n) for n in partition_profile(x, y).sizes)


def min_entropy_oracle(x: int, y: int, mode: str = "exhaustive", trials: int = 100_000,
                       seed: int = 0) -> tuple[float, tuple[Fraction, ...]]:
    """Smallest entropy over the family, by enumeration or by sampling.

    Sampling only certifies a one-sided statement: no sample beats p_star.
    """
    M = 3 ** (x + y)
    if mode == "exhaustive":
        best = min(enumerate_family(x, y), key=lambda p: (entropy(p), p))
        return entropy(best), best
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    counts = sample_family_counts(x, y, trials, np.random.default_rng(seed))
    h = np.atleast_1d(entropy_from_counts(counts, M))
    i = int(np.argmin(h))
    return float(h[i]), tuple(Fraction(int(c), M) for c in counts[i])


def prefix_dominance_check(p, x: int | None = None, y: int | None = None) -> bool:
    """True iff every prefix sum of p_star - p is nonnegative (exact)."""
    if isinstance(p, LabelFamilyVector):
        masses = p.masses
    else:
        masses = tuple(Fraction(m) for m in p)
    if x is None or y is None:
        n = round(math.log2(len(masses)))
        x, y = n, 0
    pstar = clumpy_counts(x, y)
    if len(pstar) != len(masses):
        raise ValueError("p and p_star have different lengths")
    M = 3 ** (x + y)
    gap = 0
    for s, m in zip(pstar, masses):
        gap += s - m * M
        if gap < 0:
            return False
    return True


def prefix_dominance_counts(counts: np.ndarray, x: int, y: int) -> np.ndarray:
    """Row-wise prefix dominance for integer count arrays; exact integer math."""
    pstar = np.asarray(clumpy_counts(x, y), dtype=np.int64)
    gaps = np.cumsum(pstar - np.atleast_2d(counts), axis=1)
    return (gaps >= 0).all(axis=1)


def _to_pmf(p) -> tuple[Fraction, ...]:
    out = []
    for v in p:
        out.append(Fraction(repr(v)) if isinstance(v, float) else Fraction(v))
    if any(v < 0 for v in out) or sum(out) != 1:
        raise ValueError("input is not a probability mass function")
    return tuple(out)


def _birkhoff(mix: list[list[Fraction]]) -> list[tuple[tuple[int, ...], Fraction]]:
    """Exact Birkhoff-von Neumann split of a doubly stochastic matrix.

    Entries are rescaled to integers over their common denominator so the
    peeling runs on integer arrays.
    """
    L = len(mix)
    den = math.lcm(*(v.denominator for row in mix for v in row))
    scaled = [[v.numerator * (den // v.denominator) for v in row] for row in mix]
    rest = np.array(scaled, dtype=np.int64 if den < 2 ** 62 else object)
    out = []
    while True:
        support = rest > 0
        if not support.any():
            return out
        rows, cols = linear_sum_assignment(~support)
        if not support[rows, cols].all():
            raise DecompositionError("mixing matrix is not doubly stochastic")
        theta = rest[rows, cols].min()
        rest[rows, cols] -= theta
        out.append((tuple(int(c) for c in cols), Fraction(int(theta), den)))
        if len(out) > L * L:
            raise DecompositionError("Birkhoff split did not terminate")


def decompose_into_permuted_clumpy(p, x: int, y: int, atoms: str = "birkhoff") -> Decomposition:
    """Write p in conv(family) as a convex combination of permutations of p_star.

    p is sorted nonincreasing first.  Each pass of the loop picks the first
    index i where the running vector p' exceeds p and the first j where it
    falls short, then replaces p' by (1 - lambda) p' + lambda p'[i <-> j].

    The passes compose into one doubly stochastic matrix D with p = D p_star.
    With ``atoms="birkhoff"`` D is split exactly into permutation matrices,
    which keeps the atom count below (L-1)^2 + 1.  ``atoms="chain"`` instead
    splits every atom at every pass (weights are products of lambda and
    1 - lambda); it is exact too but grows exponentially with the pass count.
    Atoms that give the same vector are merged and the sort is undone on the
    way out.
    """
    if atoms not in ("birkhoff", "chain"):
        raise ValueError(f"unknown atom extraction {atoms!r}")
    target = _to_pmf(p)
    M = 3 ** (x + y)
    pstar = tuple(Fraction(c, M) for c in clumpy_counts(x, y))
    L = len(pstar)
    if len(target) != L:
        raise ValueError(f"p has length {len(target)}, expected L = {L}")

    order = sorted(range(L), key=lambda k: -target[k])
    q = [target[k] for k in order]

    one, zero = Fraction(1), Fraction(0)
    mix = [[one if r == c else zero for c in range(L)] for r in range(L)]
    chain: dict[tuple, tuple[tuple[int, ...], Fraction]] = {pstar: (tuple(range(L)), one)}
    current = list(pstar)
    iterations = 0
    while current != q:
        iterations += 1
        if iterations > L:
            raise DecompositionError("no convergence within L iterations; p is not in conv(family)")
        try:
            i = next(k for k in range(L) if current[k] > q[k])
            j = next(k for k in range(L) if current[k] < q[k])
        except StopIteration:
            raise DecompositionError("target mass does not match p_star") from None
        spread = current[i] - current[j]
        if spread <= 0:
            raise DecompositionError("p is not dominated by p_star")
        lam = min(current[i] - q[i], q[j] - current[j]) / spread
        if not 0 <= lam <= 1:
            raise DecompositionError(f"step weight {lam} outside [0, 1]")
        current[i], current[j] = ((1 - lam) * current[i] + lam * current[j],
                                  (1 - lam) * current[j] + lam * current[i])
        if atoms == "birkhoff":
            ri, rj = mix[i], mix[j]
            mix[i] = [(1 - lam) * a + lam * b for a, b in zip(ri, rj)]
            mix[j] = [(1 - lam) * b + lam * a for a, b in zip(ri, rj)]
        else:
            chain = _split_chain(chain, i, j, lam, pstar)

    if atoms == "birkhoff":
        merged: dict[tuple, tuple[tuple[int, ...], Fraction]] = {}
        for perm, w in _birkhoff(mix):
            vec = tuple(pstar[t] for t in perm)
            old = merged.get(vec)
            merged[vec] = (perm, w) if old is None else (old[0], old[1] + w)
        chain = merged

    result = []
    for perm, w in chain.values():
        restored = [0] * L
        for k in range(L):
            restored[order[k]] = perm[k]
        result.append(DecompositionAtom(tuple(restored), w))
    decomposition = Decomposition(tuple(result), iterations)
    if decomposition.reconstruct(pstar) != target:
        raise DecompositionError("reconstruction does not match the target")
    return decomposition


def _split_chain(chain, i, j, lam, pstar):
    split: dict[tuple, tuple[tuple[int, ...], Fraction]] = {}
    for perm, w in chain.values():
        swapped = list(perm)
        swapped[i], swapped[j] = swapped[j], swapped[i]
        for new_perm, share in ((perm, 1 - lam), (tuple(swapped), lam)):
            if share == 0:
                continue
            vec = tuple(pstar[t] for t in new_perm)
            old = split.get(vec)
            split[vec] = (new_perm, w * share) if old is None else (old[0], old[1] + w * share)
    return split


def min_entropy_floor(c: float, u: int) -> tuple[FloorConstrainedPmf, float]:
    """Least-entropy pmf on u points with every mass at least c."""
    if c <= 0 or u < 1:
        raise ValueError("need c > 0 and u >= 1")
    if u * c > 1 + 1e-12:
        raise ValueError(f"infeasible floor: u*c = {u * c} > 1")
    head = max(1 - (u - 1) * c, c)
    masses = (head,) + (c,) * (u - 1)
    return FloorConstrainedPmf(c, u, masses), entropy(masses)


def floor_grid_minimum(c: float, u: int, step: float = 1e-3) -> float:
    """Brute-force minimum entropy over a grid of feasible pmfs (u <= 3)."""
    if u == 1:
        return 0.0
    grid = np.arange(c, 1 - (u - 1) * c + step / 2, step)
    if u == 2:
        pts = np.stack([grid, 1 - grid], axis=-1)
    elif u == 3:
        a, b = np.meshgrid(grid, grid, indexing="ij")
        pts = np.stack([a, b, 1 - a - b], axis=-1).reshape(-1, 3)
        pts = pts[pts[:, 2] >= c - 1e-12]
    else:
        raise ValueError("grid search is only provided for u <= 3")
    pts = np.clip(pts, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(pts > 0, pts * np.log2(np.where(pts > 0, pts, 1.0)), 0.0).sum(axis=1)
    return float(h.min())
