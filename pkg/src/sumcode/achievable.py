"""Variable-length network code for the arithmetic sum over the diamond network.

Edge s1 -> t carries ``[flag][x1 second half][code for (x1 + x3) first half]``
and edge s2 -> t carries ``[flag][x2 first half][code for (x2 + x3) second
half]``.  The pairwise sums are ternary with pmf (1/4, 1/2, 1/4); a block
inside the weakly typical set is sent as its rank among typical blocks, any
other block as its base-3 value.  The terminal reads ``1 + k/2`` symbol pairs,
learns both payload lengths from the flags, and stops after the longer one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, NamedTuple, Sequence

import numpy as np

from .core import (MessageVector, ResourceError, SumVector, arithmetic_sum,
                   max_enumeration_k)

FIRST, SECOND = "first", "second"
S1, S2 = "s1", "s2"
DEFAULT_EPSILON = Fraction(1, 20)
SOURCE_ENTROPY = Fraction(3, 2)
_PAIR_PMF = (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4))


class BlockLengthError(ValueError):
    """The scheme needs an even block length."""


class DecodeError(ValueError):
    """A codeword is malformed or shorter than its header announces."""


def as_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float.

    Floats go through their shortest repr so that ``0.05`` means 1/20.
    """
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class CodeWord:
    symbols: tuple[int, ...]

    def __post_init__(self):
        symbols = tuple(int(s) for s in self.symbols)
        if any(s not in (0, 1) for s in symbols):
            raise ValueError("codewords are binary")
        object.__setattr__(self, "symbols", symbols)

    @property
    def length(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return "".join(map(str, self.symbols))

    @classmethod
    def from_bits(cls, text: str) -> "CodeWord":
        return cls(tuple(int(ch) for ch in text.strip()))


@dataclass(frozen=True)
class TernaryBlock:
    values: tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        if any(v not in (0, 1, 2) for v in values):
            raise ValueError(f"ternary block components must be 0, 1 or 2: {self.values!r}")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    @property
    def ones(self) -> int:
        return self.values.count(1)


@dataclass(frozen=True)
class TypicalityParams:
    """Weak-typicality parameters for blocks of ``half_len`` pairwise sums.

    ``epsilon`` is held as an exact rational so that membership tests on the
    boundary of the typical set are decided exactly.
    """

    epsilon: Fraction
    half_len: int
    source_entropy: Fraction = field(default=SOURCE_ENTROPY, init=False)
    typical_code_len: int = field(init=False)
    atypical_code_len: int = field(init=False)

    def __post_init__(self):
        eps = as_fraction(self.epsilon)
        if eps <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.half_len < 1:
            raise ValueError(f"half length must be at least 1, got {self.half_len}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "typical_code_len",
                           math.ceil(self.half_len * (SOURCE_ENTROPY + eps)))
        # ceil(h log 3) is the bit length of 3^h - 1 since h log 3 is never an integer
        object.__setattr__(self, "atypical_code_len", (3 ** self.half_len - 1).bit_length())

    @classmethod
    def for_block_length(cls, k: int, epsilon=DEFAULT_EPSILON) -> "TypicalityParams":
        return cls(as_fraction(epsilon), half_block(k))

    @property
    def k(self) -> int:
        return 2 * self.half_len

    def payload_len(self, typical: bool) -> int:
        return self.typical_code_len if typical else self.atypical_code_len


class StoppingOutcome(NamedTuple):
    N: int
    sum_estimate: SumVector


def half_block(k: int) -> int:
    if k < 2 or k % 2:
        raise BlockLengthError(f"block length must be a positive even number, got {k}")
    return k // 2


def _bits_of(v) -> tuple[int, ...]:
    return v.bits if isinstance(v, MessageVector) else MessageVector(tuple(v)).bits


def pairwise_sum_half(x, x3, half: str) -> TernaryBlock:
    """Component-wise sum of ``x`` and ``x3`` over the selected half."""
    a, b = _bits_of(x), _bits_of(x3)
    if len(a) != len(b):
        raise ValueError(f"message lengths differ: {len(a)} vs {len(b)}")
    h = half_block(len(a))
    if half == FIRST:
        sl = slice(0, h)
    elif half == SECOND:
        sl = slice(h, 2 * h)
    else:
        raise ValueError(f"half must be 'first' or 'second', got {half!r}")
    return TernaryBlock(tuple(u + v for u, v in zip(a[sl], b[sl])))


def typical_ones(ones, half_len: int, epsilon: Fraction):
    """Typicality as a function of the number of 1s in a block.

    A block with ``m`` ones has -log p = 2*half_len - m, so its empirical
    entropy rate is within epsilon of 1.5 iff |half_len - 2m| <= 2*eps*half_len.
    Accepts ints or integer numpy arrays.
    """
    num, den = epsilon.numerator, epsilon.denominator
    return den * abs(half_len - 2 * ones) <= 2 * num * half_len


def is_weakly_typical(block: TernaryBlock, params: TypicalityParams) -> bool:
    if len(block) != params.half_len:
        raise ValueError(f"block length {len(block)} != {params.half_len}")
    return bool(typical_ones(block.ones, params.half_len, params.epsilon))


def block_log_prob(block: TernaryBlock) -> float:
    """log2 of the block's probability under (1/4, 1/2, 1/4)."""
    return -float(2 * len(block) - block.ones)


@lru_cache(maxsize=64)
def _completion_table(half_len: int, epsilon: Fraction) -> tuple[tuple[int, ...], ...]:
    # table[r][c]: typical completions of length r after c ones so far
    prev = tuple(int(typical_ones(c, half_len, epsilon)) for c in range(half_len + 1))
    table = [prev]
    for r in range(1, half_len + 1):
        row = tuple(2 * prev[c] + prev[c + 1] for c in range(half_len + 1 - r))
        table.append(row)
        prev = row
    return tuple(table)


def typical_set_size(params: TypicalityParams) -> int:
    return _completion_table(params.half_len, params.epsilon)[params.half_len][0]


def typical_rank(block: TernaryBlock, params: TypicalityParams) -> int:
    """Lexicographic rank (0 < 1 < 2) of a typical block among typical blocks."""
    if not is_weakly_typical(block, params):
        raise ValueError("block is not typical")
    table = _completion_table(params.half_len, params.epsilon)
    h = params.half_len
    rank = ones = 0
    for i, sym in enumerate(block):
        rest = table[h - i - 1]
        if sym >= 1:
            rank += rest[ones]
        if sym == 2:
            rank += rest[ones + 1]
        if sym == 1:
            ones += 1
    return rank


def typical_unrank(index: int, params: TypicalityParams) -> TernaryBlock:
    table = _completion_table(params.half_len, params.epsilon)
    h = params.half_len
    if not 0 <= index < table[h][0]:
        raise DecodeError(f"typical index {index} out of range")
    values = []
    ones = 0
    for i in range(h):
        rest = table[h - i - 1]
        for sym, nxt in ((0, ones), (1, ones + 1), (2, ones)):
            count = rest[nxt]
            if index < count:
                values.append(sym)
                ones = nxt
                break
            index -= count
    return TernaryBlock(tuple(values))


def enumerate_typical_set(params: TypicalityParams) -> list[TernaryBlock]:
    """All typical blocks in lexicographic order (small half lengths only)."""
    h = params.half_len
    if h > 20:
        raise ResourceError("typical-set enumeration is limited to k/2 <= 20")
    return [TernaryBlock(v) for v in itertools.product((0, 1, 2), repeat=h)
            if typical_ones(v.count(1), h, params.epsilon)]


def _to_bits(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def _from_bits(bits: Sequence[int]) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | b
    return value


def encode_block(block: TernaryBlock, params: TypicalityParams) -> tuple[int, tuple[int, ...]]:
    """Flag bit and payload bits for one ternary block."""
    if is_weakly_typical(block, params):
        return 1, _to_bits(typical_rank(block, params), params.typical_code_len)
    value = 0
    for v in block:
        value = 3 * value + v
    return 0, _to_bits(value, params.atypical_code_len)


def decode_block(flag: int, payload: Sequence[int], params: TypicalityParams) -> TernaryBlock:
    value = _from_bits(payload)
    if flag:
        return typical_unrank(value, params)
    if value >= 3 ** params.half_len:
        raise DecodeError("atypical payload exceeds 3^(k/2)")
    digits = []
    for _ in range(params.half_len):
        value, d = divmod(value, 3)
        digits.append(d)
    return TernaryBlock(tuple(reversed(digits)))


def encode_edge(x_own, x3, role: str, params: TypicalityParams) -> CodeWord:
    """Codeword on edge (s1, t) or (s2, t): flag, uncoded half, payload."""
    own = _bits_of(x_own)
    k = len(own)
    h = half_block(k)
    if h != params.half_len:
        raise ValueError(f"params are for k={params.k}, message has k={k}")
    if role == S1:
        block = pairwise_sum_half(own, x3, FIRST)
        uncoded = own[h:]
    elif role == S2:
        block = pairwise_sum_half(own, x3, SECOND)
        uncoded = own[:h]
    else:
        raise ValueError(f"role must be 's1' or 's2', got {role!r}")
    flag, payload = encode_block(block, params)
    return CodeWord((flag,) + uncoded + payload)


def encode(x1, x2, x3, params: TypicalityParams) -> tuple[CodeWord, CodeWord]:
    return encode_edge(x1, x3, S1, params), encode_edge(x2, x3, S2, params)


def header_length(params: TypicalityParams) -> int:
    return 1 + params.half_len


def stopping_rule(pairs: Sequence[tuple[int, int]], params: TypicalityParams) -> int | None:
    """Stopping time implied by the pairs read so far, or None if undetermined.

    Only the two flags, i.e. the first pair, are consulted; the rule waits
    for the full ``1 + k/2`` header so that the uncoded halves are in hand.
    """
    if len(pairs) < header_length(params):
        return None
    f1, f2 = pairs[0]
    return header_length(params) + max(params.payload_len(bool(f1)),
                                       params.payload_len(bool(f2)))


@lru_cache(maxsize=1 << 16)
def _parse_edge(symbols: tuple[int, ...], params: TypicalityParams):
    h = params.half_len
    if len(symbols) < 1 + h:
        raise DecodeError("codeword shorter than its header")
    flag = symbols[0]
    n = 1 + h + params.payload_len(bool(flag))
    if len(symbols) < n:
        raise DecodeError(f"codeword truncated: {len(symbols)} < {n} symbols")
    block = decode_block(flag, symbols[1 + h:n], params)
    return flag, symbols[1:1 + h], block.values


def decode(z1: CodeWord, z2: CodeWord, params: TypicalityParams) -> StoppingOutcome:
    """Terminal decoder: stop after the longer payload, rebuild the sum.

    The shorter codeword is treated as zero-padded up to N; padding is
    never read.
    """
    f1, x1_second, v1 = _parse_edge(tuple(z1.symbols), params)
    f2, x2_first, v2 = _parse_edge(tuple(z2.symbols), params)
    n = header_length(params) + max(params.payload_len(bool(f1)), params.payload_len(bool(f2)))
    first = tuple(a + b for a, b in zip(v1, x2_first))
    second = tuple(a + b for a, b in zip(x1_second, v2))
    return StoppingOutcome(n, SumVector(first + second))


def read_pairs(z1: CodeWord, z2: CodeWord, n: int) -> list[tuple[int, int]]:
    """First ``n`` symbol pairs, zero-padding whichever edge ends early."""
    a = z1.symbols + (0,) * max(0, n - len(z1))
    b = z2.symbols + (0,) * max(0, n - len(z2))
    return list(zip(a[:n], b[:n]))


def decode_pairs(pairs: Sequence[tuple[int, int]], params: TypicalityParams) -> StoppingOutcome:
    """Decode from a stream of symbol pairs, reading no further than N."""
    n = stopping_rule(pairs, params)
    if n is None or len(pairs) < n:
        raise DecodeError("pair stream ended before the stopping time")
    z1 = CodeWord(tuple(p[0] for p in pairs[:n]))
    z2 = CodeWord(tuple(p[1] for p in pairs[:n]))
    return decode(z1, z2, params)


Decoder = Callable[[CodeWord, CodeWord, TypicalityParams], StoppingOutcome]


@dataclass
class ZeroErrorReport:
    k: int
    epsilon: Fraction
    tuples_checked: int
    errors: int
    injective: bool
    counterexample: dict | None
    n_histogram: dict[int, int]

    @property
    def passed(self) -> bool:
        return self.errors == 0 and self.injective

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"zero-error: {status} ({self.tuples_checked} tuples)"


def _base4(bits: np.ndarray) -> np.ndarray:
    weights = 4 ** np.arange(bits.shape[-1], dtype=np.int64)
    return bits.astype(np.int64) @ weights


def verify_zero_error(k: int, params: TypicalityParams | None = None,
                      decoder: Decoder = decode, max_k: int = 8) -> ZeroErrorReport:
    """Exhaustively check the code over all 2^(3k) input tuples.

    Every codeword pair the encoders can emit is decoded once; the decoded
    sums are then compared against the true sum of every tuple.  The base-4
    packing of a sum vector is the sum of the packings of its three binary
    summands, which makes the per-tuple comparison a table lookup.  Also
    checks that each encoder is injective in its own message for every x3.
    """
    if k > max_k:
        raise ResourceError(f"exhaustive verification is limited to k <= {max_k}")
    params = params or TypicalityParams.for_block_length(k)
    if params.k != k:
        raise ValueError(f"params are for k={params.k}, not {k}")
    n_msgs = 1 << k
    msgs = [MessageVector.from_int(v, k) for v in range(n_msgs)]
    bits = np.array([m.bits for m in msgs], dtype=np.int64)
    packed = _base4(bits)

    ids1: dict[tuple, int] = {}
    ids2: dict[tuple, int] = {}
    words1: list[CodeWord] = []
    words2: list[CodeWord] = []
    grid1 = np.empty((n_msgs, n_msgs), dtype=np.int64)  # [x3, x1] -> codeword id
    grid2 = np.empty((n_msgs, n_msgs), dtype=np.int64)
    injective = True
    for i3, x3 in enumerate(msgs):
        for grid, ids, words, role in ((grid1, ids1, words1, S1), (grid2, ids2, words2, S2)):
            seen = set()
            for i, x in enumerate(msgs):
                z = encode_edge(x, x3, role, params)
                if z.symbols in seen:
                    injective = False
                seen.add(z.symbols)
                if z.symbols not in ids:
                    ids[z.symbols] = len(words)
                    words.append(z)
                grid[i3, i] = ids[z.symbols]

    decoded = np.full((len(words1), len(words2)), -1, dtype=np.int64)
    stop = np.zeros((len(words1), len(words2)), dtype=np.int64)
    for a, z1 in enumerate(words1):
        for b, z2 in enumerate(words2):
            try:
                out = decoder(z1, z2, params)
            except DecodeError:
                continue
            decoded[a, b] = out.sum_estimate.as_int()
            stop[a, b] = out.N

    errors = 0
    counterexample = None
    hist: dict[int, int] = {}
    for i3 in range(n_msgs):
        truth = packed[:, None] + packed[None, :] + packed[i3]
        rows, cols = grid1[i3][:, None], grid2[i3][None, :]
        got = decoded[rows, cols]
        bad = got != truth
        n_bad = int(bad.sum())
        if n_bad and counterexample is None:
            i1, i2 = map(int, np.argwhere(bad)[0])
            z1, z2 = words1[grid1[i3, i1]], words2[grid2[i3, i2]]
            counterexample = {
                "x1": msgs[i1].bits, "x2": msgs[i2].bits, "x3": msgs[i3].bits,
                "expected": arithmetic_sum(msgs[i1], msgs[i2], msgs[i3]).values,
                "decoded": _unpack4(int(got[i1, i2]), k),
                "z1": str(z1), "z2": str(z2),
            }
        errors += n_bad
        values, counts = np.unique(stop[rows, cols], return_counts=True)
        for v, c in zip(values.tolist(), counts.tolist()):
            hist[v] = hist.get(v, 0) + c
    return ZeroErrorReport(k, params.epsilon, n_msgs ** 3, errors, injective,
                           counterexample, dict(sorted(hist.items())))


def _unpack4(value: int, k: int) -> tuple[int, ...] | None:
    if value < 0:
        return None
    return tuple((value >> (2 * i)) & 3 for i in range(k))


class StoppingTimeEstimate(NamedTuple):
    expected_n: float
    rate: float


def typical_probability(params: TypicalityParams) -> Fraction:
    """Pr(block typical), by enumerating all 3^(k/2) blocks with their pmf."""
    total = Fraction(0)
    for block in itertools.product((0, 1, 2), repeat=params.half_len):
        if typical_ones(block.count(1), params.half_len, params.epsilon):
            p = Fraction(1)
            for v in block:
                p *= _PAIR_PMF[v]
            total += p
    return total


def exact_expected_stopping_time(params: TypicalityParams) -> Fraction:
    """E N as an exact rational.

    N depends on the inputs only through the typicality of V1 (first halves
    of x1, x3) and V2 (second halves of x2, x3), which are independent and
    identically distributed.
    """
    p = typical_probability(params)
    mean_max = Fraction(0)
    for t1, t2 in itertools.product((True, False), repeat=2):
        weight = (p if t1 else 1 - p) * (p if t2 else 1 - p)
        mean_max += weight * max(params.payload_len(t1), params.payload_len(t2))
    return header_length(params) + mean_max


def sample_inputs(k: int, trials: int, seed: int, chunk: int = 1000
                  ) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Input triples in chunks; chunk j always draws from stream j of ``seed``.

    The fixed chunk-to-stream mapping keeps aggregates reproducible however
    the chunks are scheduled.
    """
    n_chunks = -(-trials // chunk)
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    for j, ss in enumerate(streams):
        size = min(chunk, trials - j * chunk)
        rng = np.random.default_rng(ss)
        x = rng.integers(0, 2, size=(3, size, k), dtype=np.uint8)
        yield x[0], x[1], x[2]


def stopping_times(x1: np.ndarray, x2: np.ndarray, x3: np.ndarray,
                   params: TypicalityParams) -> np.ndarray:
    """Vectorized N for rows of input triples; agrees with ``decode``."""
    h = params.half_len
    ones1 = np.count_nonzero(x1[:, :h] != x3[:, :h], axis=1)
    ones2 = np.count_nonzero(x2[:, h:] != x3[:, h:], axis=1)
    t1 = typical_ones(ones1, h, params.epsilon)
    t2 = typical_ones(ones2, h, params.epsilon)
    len1 = np.where(t1, params.typical_code_len, params.atypical_code_len)
    len2 = np.where(t2, params.typical_code_len, params.atypical_code_len)
    return header_length(params) + np.maximum(len1, len2)


def expected_stopping_time(k: int, params: TypicalityParams | None = None,
                           mode: str = "exact", trials: int = 100_000,
                           seed: int = 0) -> StoppingTimeEstimate:
    """E N and the rate k / E N (binary code alphabet).

    ``mode="exact"`` is limited to k <= SUMCODE_MAX_K (default 24);
    ``mode="monte_carlo"`` averages N over ``trials`` sampled inputs.
    """
    params = params or TypicalityParams.for_block_length(k)
    if params.k != k:
        raise ValueError(f"params are for k={params.k}, not {k}")
    if mode == "exact":
        if k > max_enumeration_k():
            raise ResourceError(f"exact E N is limited to k <= {max_enumeration_k()}")
        en = float(exact_expected_stopping_time(params))
    elif mode in ("monte_carlo", "mc"):
        if trials < 1:
            raise ValueError("need at least one trial")
        total = 0
        for x1, x2, x3 in sample_inputs(k, trials, seed):
            total += int(stopping_times(x1, x2, x3, params).sum())
        en = total / trials
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return StoppingTimeEstimate(en, k / en)


def stopping_time_upper_bound(params: TypicalityParams, atypical_prob=None) -> float:
    """1 + k/2 + ceil(k/2 (1.5+eps)) + 2 eps' ceil(k/2 log 3).

    ``atypical_prob`` (eps') bounds Pr(a block is atypical); it defaults to
    epsilon, which is valid once k is large enough for the AEP to apply.
    """
    eps = float(params.epsilon if atypical_prob is None else atypical_prob)
    return (header_length(params) + params.typical_code_len
            + 2 * eps * params.atypical_code_len)
