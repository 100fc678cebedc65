"""Stopping-time mass bound and the dual certificate for H(N)/E N.

A zero-error stopping time satisfies Pr(N = n) <= (3/8)^k |Z|^(2n).  Among all
pmfs obeying that bound, E N - (Delta / log e) H(N) is bounded below by the
Lagrange dual evaluated at one hand-picked point; once that value is
positive, H(N)/E N <= epsilon with Delta = log e / epsilon.

Delta is carried in bits (log e / epsilon) while the exponentials are
natural, matching ``E N - (Delta / log e) H(N) = sum p_i (i + Delta ln p_i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

LOG2E = math.log2(math.e)
DEFAULT_SEARCH_CAP = 10 ** 6


class ThresholdNotFound(RuntimeError):
    pass


def _log2_mass_bound(n: int, k: int, alphabet_size: int) -> float:
    return k * math.log2(3 / 8) + 2 * n * math.log2(alphabet_size)


def stopping_mass_bound(n: int, k: int, alphabet_size: int = 2, clamp: bool = True) -> float:
    """(3/8)^k |Z|^(2n), by default clamped to 1."""
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    if alphabet_size < 2:
        raise ValueError("alphabet needs at least two symbols")
    e = _log2_mass_bound(n, k, alphabet_size)
    if clamp and e >= 0:
        return 1.0
    return 2.0 ** e if e < 1024 else math.inf


def vacuous_from(k: int, alphabet_size: int = 2) -> int:
    """Smallest n at which the mass bound reaches 1."""
    n = max(1, math.floor(k / 2 * math.log(8 / 3) / math.log(alphabet_size)))
    while _log2_mass_bound(n, k, alphabet_size) < 0:
        n += 1
    while n > 1 and _log2_mass_bound(n - 1, k, alphabet_size) >= 0:
        n -= 1
    return n


def satisfies_mass_bound(pmf: dict[int, float], k: int, alphabet_size: int = 2) -> bool:
    return all(p <= stopping_mass_bound(n, k, alphabet_size) + 1e-15
               for n, p in pmf.items() if p > 0)


def geometric_ratio(q: float = 0.5, terms: int = 2000) -> float:
    """H(N)/E N for N ~ Geometric(q) on {1, 2, ...}; equals 1 at q = 1/2."""
    h = en = 0.0
    for n in range(1, terms + 1):
        p = (1 - q) ** (n - 1) * q
        if p == 0:
            break
        h -= p * math.log2(p)
        en += n * p
    return h / en


def dual_constant(alphabet_size: int) -> float:
    """Point where the mass bound becomes vacuous, per unit k: (1/2) log_|Z|(8/3).

    The multipliers mu_i = floor(ck) - i are only affordable when
    (3/8)^k |Z|^(2 floor(ck)) <= 1, which pins c to half of log_|Z|(8/3).
    """
    return 0.5 * math.log(8 / 3) / math.log(alphabet_size)


@dataclass(frozen=True)
class DualParams:
    k: int
    alphabet_size: int = 2
    epsilon: float = 0.1
    lam: float | None = None
    c: float = field(init=False)
    delta: float = field(init=False)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.alphabet_size < 2:
            raise ValueError("alphabet needs at least two symbols")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        object.__setattr__(self, "c", dual_constant(self.alphabet_size))
        object.__setattr__(self, "delta", LOG2E / self.epsilon)
        if self.lam is None:
            object.__setattr__(self, "lam", self.c * self.k / 2)

    @property
    def cutoff(self) -> int:
        return math.floor(self.c * self.k)


def mass_bound_partial_sum(k: int, alphabet_size: int = 2, c: float | None = None) -> float:
    """(3/8)^k sum_{i=1}^{K} (K - i) |Z|^(2i) with K = floor(ck).

    Summed as |Z|^(2K) (3/8)^k sum_{m<K} m r^m with r = |Z|^-2 so that
    large k neither overflows nor loses the prefactor.
    """
    c = dual_constant(alphabet_size) if c is None else c
    K = math.floor(c * k)
    if K < 1:
        return 0.0
    r = alphabet_size ** -2.0
    series = r * (1 - K * r ** (K - 1) + (K - 1) * r ** K) / (1 - r) ** 2
    log2_pref = 2 * K * math.log2(alphabet_size) + k * math.log2(3 / 8)
    return series * 2.0 ** log2_pref if log2_pref < 1024 else math.inf


def partial_sum_cap(alphabet_size: int) -> float:
    z2 = alphabet_size ** 2
    return z2 / (z2 - 1) ** 2


def dual_lower_bound(params: DualParams) -> float:
    """Lower bound on the dual function at (lambda, nu = 0, mu_i = K - i).

    lam - Z^2/(Z^2-1)^2 - Delta K e^((lam-K-Delta)/Delta)
        - Delta / (e - e^(1 - 1/Delta)) e^((lam-K)/Delta)
    """
    lam, d, K = params.lam, params.delta, params.cutoff
    return (lam - partial_sum_cap(params.alphabet_size)
            - d * K * math.exp((lam - K - d) / d)
            - d / (math.e - math.exp(1 - 1 / d)) * math.exp((lam - K) / d))


def dual_value(params: DualParams) -> float:
    """The dual function itself at the same point, with the exact tail sum.

    Dominates ``dual_lower_bound`` whenever the partial sum stays below its cap.
    """
    lam, d, K = params.lam, params.delta, params.cutoff
    tail = d * math.exp((lam - K - 1 - d) / d) / (1 - math.exp(-1 / d))
    return (lam - mass_bound_partial_sum(params.k, params.alphabet_size, params.c)
            - d * K * math.exp((lam - K - d) / d) - tail)


class ThresholdRow(NamedTuple):
    k: int
    value: float
    positive: bool


@dataclass
class ThresholdResult:
    k0: int
    trace: list[ThresholdRow]


def _positive(k: int, alphabet_size: int, epsilon: float) -> tuple[bool, float]:
    v = dual_lower_bound(DualParams(k, alphabet_size, epsilon))
    return v > 0, v


def hn_en_threshold(alphabet_size: int = 2, epsilon: float = 0.1,
                    cap: int = DEFAULT_SEARCH_CAP) -> ThresholdResult:
    """Smallest k0 with a positive dual bound for every k in [k0, 4 k0].

    Linear scan; every k up to 4 k0 is evaluated once and kept in the trace.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    trace: list[ThresholdRow] = []

    def row(k: int) -> ThresholdRow:
        while len(trace) < k:
            kk = len(trace) + 1
            ok, v = _positive(kk, alphabet_size, epsilon)
            trace.append(ThresholdRow(kk, v, ok))
        return trace[k - 1]

    k0 = 1
    while k0 <= cap:
        failure = next((k for k in range(k0, 4 * k0 + 1) if not row(k).positive), None)
        if failure is None:
            return ThresholdResult(k0, trace[:4 * k0])
        k0 = failure + 1
    raise ThresholdNotFound(f"no threshold below k = {cap}")


def iter_trace_csv(result: ThresholdResult) -> Iterator[str]:
    yield "k,dual_lower_bound,positive"
    for r in result.trace:
        yield f"{r.k},{r.value!r},{int(r.positive)}"
