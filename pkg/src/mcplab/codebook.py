"""Constructive program model with exact description lengths.

Every candidate signal is the output of a short, explicitly coded program: an
8-bit generator tag followed by a fixed-width payload.  Description length is
therefore exact by construction (header + payload bits), the candidate set for
a bit budget is finite, and enumeration has a canonical total order: by
description length, then generator tag, then payload read as an unsigned
integer (MSB first).

Payload layouts (all fields fixed width, MSB first; ceil-log2 widths are
written cl2 below, with cl2(1) = 0 meaning a zero-width field that encodes 0):

  CONSTANT             [value: m]
                       one grid value replicated n times.
  K_SPARSE             [k: cl2(n+1)] [k positions: cl2(n) each, strictly
                       increasing] [k values: m each]
                       zeros everywhere except the listed positions.
  PIECEWISE_CONSTANT   [b: cl2(n)] [b breakpoints in 1..n-1: cl2(n) each,
                       strictly increasing] [b+1 levels: m each]
                       level j on the segment [break_{j-1}, break_j).
  PRNG_EXPANSION       [seed: 16]
                       a fixed xorshift64 bit expander (documented at
                       _expander_bits) fills n*m bits, m per coordinate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator

import numpy as np

from .quantize import QuantizedSignal, Resolution, as_resolution
from .rng import derive_seed, raw_uint64

__all__ = [
    "HEADER_BITS",
    "MAX_ENUMERABLE_BITS",
    "PRNG_SEED_BITS",
    "Family",
    "ComplexityBudget",
    "ProgramEntry",
    "Codebook",
    "MalformedPayloadError",
    "BudgetTooLargeError",
    "EmptyCodebookError",
    "decode",
    "description_length",
    "enumerate_entries",
    "count_entries",
    "sample_entry",
    "entry_id",
]

HEADER_BITS = 8
PRNG_SEED_BITS = 16

# Enumeration feasibility guard; keeps exhaustive solving tractable.
MAX_ENUMERABLE_BITS = 26

_SAMPLE_TAG = 0x5A


class Family(enum.IntEnum):
    """Built-in generator families; the integer value is the header tag."""

    CONSTANT = 0
    K_SPARSE = 1
    PIECEWISE_CONSTANT = 2
    PRNG_EXPANSION = 3


class MalformedPayloadError(ValueError):
    """A payload does not parse under its family's documented layout."""


class BudgetTooLargeError(ValueError):
    """Requested budget exceeds the enumeration feasibility cap."""


class EmptyCodebookError(ValueError):
    """No entry fits the budget."""


@dataclass(frozen=True)
class ComplexityBudget:
    """Cap on description length in bits (the known complexity upper bound)."""

    max_bits: int
    cap: int = MAX_ENUMERABLE_BITS

    def __post_init__(self) -> None:
        if self.max_bits < 1:
            raise ValueError(f"budget must be >= 1 bit, got {self.max_bits}")
        if self.max_bits > self.cap:
            raise BudgetTooLargeError(
                f"budget {self.max_bits} bits exceeds the enumeration cap {self.cap}"
            )


@dataclass(frozen=True)
class ProgramEntry:
    """One program: generator tag plus fixed-layout payload bits."""

    generator_id: Family
    payload: tuple[int, ...]
    n: int
    m: Resolution

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"signal length must be >= 1, got {self.n}")
        if len(self.payload) < 1:
            raise MalformedPayloadError("payload must be non-empty")
        if any(b not in (0, 1) for b in self.payload):
            raise MalformedPayloadError("payload must be a bit tuple")
        object.__setattr__(self, "generator_id", Family(self.generator_id))

    @property
    def payload_int(self) -> int:
        value = 0
        for b in self.payload:
            value = (value << 1) | b
        return value


def _cl2(k: int) -> int:
    """ceil(log2 k) for k >= 1; 0 means a zero-width field encoding 0."""
    return (k - 1).bit_length()


def _bits_of(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> s) & 1 for s in range(width - 1, -1, -1))


class _Reader:
    def __init__(self, payload: tuple[int, ...]):
        self.payload = payload
        self.pos = 0

    def take(self, width: int, name: str) -> int:
        if self.pos + width > len(self.payload):
            raise MalformedPayloadError(f"payload ends inside field '{name}'")
        value = 0
        for b in self.payload[self.pos : self.pos + width]:
            value = (value << 1) | b
        self.pos += width
        return value

    def done(self) -> None:
        if self.pos != len(self.payload):
            raise MalformedPayloadError(
                f"{len(self.payload) - self.pos} trailing payload bits"
            )


_XS_MULT = 0x9E3779B97F4A7C15
_XS_OFFSET = 0x6A09E667F3BCC909
_MASK64 = (1 << 64) - 1


def _expander_bits(seed_value: int, count: int) -> list[int]:
    """The PRNG_EXPANSION bit source, frozen for golden-vector stability.

    state_0 = (seed * 0x9E3779B97F4A7C15 + 0x6A09E667F3BCC909) mod 2^64,
    replaced by the multiplier if zero.  Each step applies the xorshift64
    update (<<13, >>7, <<17) and emits the 64 state bits MSB first.
    """
    state = (seed_value * _XS_MULT + _XS_OFFSET) & _MASK64
    if state == 0:
        state = _XS_MULT
    out: list[int] = []
    while len(out) < count:
        state ^= (state << 13) & _MASK64
        state ^= state >> 7
        state ^= (state << 17) & _MASK64
        out.extend((state >> (63 - i)) & 1 for i in range(64))
    return out[:count]


def description_length(entry: ProgramEntry) -> int:
    """Exact coded size in bits: 8-bit header plus the payload."""
    return HEADER_BITS + len(entry.payload)


def decode(entry: ProgramEntry) -> QuantizedSignal:
    """Deterministically expand an entry into its quantized signal."""
    n, m = entry.n, entry.m.m
    step = 2.0**-m
    reader = _Reader(entry.payload)
    family = entry.generator_id

    if family is Family.CONSTANT:
        value = reader.take(m, "value")
        reader.done()
        values = np.full(n, value * step)

    elif family is Family.K_SPARSE:
        k = reader.take(_cl2(n + 1), "count")
        if k > n:
            raise MalformedPayloadError(f"count {k} exceeds n={n}")
        positions = [reader.take(_cl2(n), f"position {i}") for i in range(k)]
        for i in range(1, k):
            if positions[i] <= positions[i - 1]:
                raise MalformedPayloadError(f"position {i} not strictly increasing")
        if k and positions[-1] >= n:
            raise MalformedPayloadError(f"position {k - 1} out of range")
        levels = [reader.take(m, f"value {i}") for i in range(k)]
        reader.done()
        values = np.zeros(n)
        values[positions] = np.array(levels) * step

    elif family is Family.PIECEWISE_CONSTANT:
        b = reader.take(_cl2(n), "count")
        breaks = [reader.take(_cl2(n), f"breakpoint {i}") for i in range(b)]
        for i, br in enumerate(breaks):
            if not 1 <= br <= n - 1:
                raise MalformedPayloadError(f"breakpoint {i} out of range")
            if i and br <= breaks[i - 1]:
                raise MalformedPayloadError(f"breakpoint {i} not strictly increasing")
        levels = [reader.take(m, f"level {i}") for i in range(b + 1)]
        reader.done()
        values = np.empty(n)
        edges = [0] + breaks + [n]
        for level, lo, hi in zip(levels, edges[:-1], edges[1:]):
            values[lo:hi] = level * step

    elif family is Family.PRNG_EXPANSION:
        seed_value = reader.take(PRNG_SEED_BITS, "seed")
        reader.done()
        bits = _expander_bits(seed_value, n * m)
        k = np.array(
            [int("".join(map(str, bits[i * m : (i + 1) * m])), 2) for i in range(n)]
        )
        values = k * step

    else:  # pragma: no cover - Family() coercion rejects unknown tags
        raise MalformedPayloadError(f"unknown generator {family}")

    return QuantizedSignal(values=values, resolution=entry.m)


@dataclass(frozen=True)
class _Block:
    """A run of equal-length entries of one family (fixed k or b)."""

    length: int
    family: Family
    count_value: int  # k for K_SPARSE, b for PIECEWISE_CONSTANT, else 0
    size: int


def _family_blocks(budget: ComplexityBudget, n: int, m: int, families) -> list[_Block]:
    blocks: list[_Block] = []
    limit = budget.max_bits
    for family in families:
        if family is Family.CONSTANT:
            length = HEADER_BITS + m
            if length <= limit:
                blocks.append(_Block(length, family, 0, 2**m))
        elif family is Family.K_SPARSE:
            cnt_w, pos_w = _cl2(n + 1), _cl2(n)
            for k in range(n + 1):
                length = HEADER_BITS + cnt_w + k * (pos_w + m)
                if length > limit:
                    break
                blocks.append(_Block(length, family, k, math.comb(n, k) * 2 ** (k * m)))
        elif family is Family.PIECEWISE_CONSTANT:
            cnt_w = _cl2(n)
            for b in range(n):
                length = HEADER_BITS + cnt_w + b * cnt_w + (b + 1) * m
                if length > limit:
                    break
                blocks.append(
                    _Block(length, family, b, math.comb(n - 1, b) * 2 ** ((b + 1) * m))
                )
        elif family is Family.PRNG_EXPANSION:
            length = HEADER_BITS + PRNG_SEED_BITS
            if length <= limit:
                blocks.append(_Block(length, family, 0, 2**PRNG_SEED_BITS))
        else:
            raise ValueError(f"unknown family {family!r}")
    blocks.sort(key=lambda blk: (blk.length, int(blk.family), blk.count_value))
    return blocks


def _iter_block_payloads(block: _Block, n: int, m: int) -> Iterator[tuple[int, ...]]:
    """Payloads of one block in increasing unsigned-integer order."""
    if block.family is Family.CONSTANT:
        for v in range(2**m):
            yield _bits_of(v, m)
    elif block.family is Family.K_SPARSE:
        cnt_w, pos_w = _cl2(n + 1), _cl2(n)
        k = block.count_value
        head = _bits_of(k, cnt_w)
        for combo in combinations(range(n), k):
            pos_bits = head + tuple(b for p in combo for b in _bits_of(p, pos_w))
            for vals in product(range(2**m), repeat=k):
                yield pos_bits + tuple(b for v in vals for b in _bits_of(v, m))
    elif block.family is Family.PIECEWISE_CONSTANT:
        cnt_w = _cl2(n)
        b = block.count_value
        head = _bits_of(b, cnt_w)
        for combo in combinations(range(1, n), b):
            brk_bits = head + tuple(x for p in combo for x in _bits_of(p, cnt_w))
            for vals in product(range(2**m), repeat=b + 1):
                yield brk_bits + tuple(x for v in vals for x in _bits_of(v, m))
    elif block.family is Family.PRNG_EXPANSION:
        for s in range(2**PRNG_SEED_BITS):
            yield _bits_of(s, PRNG_SEED_BITS)


def _unrank_combination(n: int, k: int, rank: int, lo: int = 0) -> tuple[int, ...]:
    """rank-th (0-based) k-combination of range(lo, lo+n) in lexicographic order."""
    combo: list[int] = []
    x = 0
    for remaining in range(k, 0, -1):
        while True:
            rest = math.comb(n - x - 1, remaining - 1)
            if rank < rest:
                break
            rank -= rest
            x += 1
        combo.append(lo + x)
        x += 1
    return tuple(combo)


def _unrank_block(block: _Block, n: int, m: int, rank: int) -> tuple[int, ...]:
    if block.family is Family.CONSTANT:
        return _bits_of(rank, m)
    if block.family is Family.PRNG_EXPANSION:
        return _bits_of(rank, PRNG_SEED_BITS)
    if block.family is Family.K_SPARSE:
        cnt_w, pos_w = _cl2(n + 1), _cl2(n)
        k = block.count_value
        combo_rank, val_rank = divmod(rank, 2 ** (k * m))
        combo = _unrank_combination(n, k, combo_rank)
        bits = _bits_of(k, cnt_w)
        bits += tuple(b for p in combo for b in _bits_of(p, pos_w))
        bits += _bits_of(val_rank, k * m)
        return bits
    cnt_w = _cl2(n)
    b = block.count_value
    combo_rank, val_rank = divmod(rank, 2 ** ((b + 1) * m))
    combo = _unrank_combination(n - 1, b, combo_rank, lo=1)
    bits = _bits_of(b, cnt_w)
    bits += tuple(x for p in combo for x in _bits_of(p, cnt_w))
    bits += _bits_of(val_rank, (b + 1) * m)
    return bits


@dataclass(frozen=True)
class Codebook:
    """A generator-family selection bound to a signal shape (n, m)."""

    n: int
    m: Resolution
    families: tuple[Family, ...] = (Family.CONSTANT, Family.K_SPARSE)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"signal length must be >= 1, got {self.n}")
        fams = tuple(Family(f) for f in self.families)
        if len(set(fams)) != len(fams) or not fams:
            raise ValueError("families must be a non-empty set of distinct tags")
        object.__setattr__(self, "m", as_resolution(self.m))
        object.__setattr__(self, "families", fams)

    def entries(self, budget: ComplexityBudget) -> Iterator[ProgramEntry]:
        return enumerate_entries(budget, self.n, self.m, self.families)

    def count(self, budget: ComplexityBudget) -> int:
        return count_entries(budget, self.n, self.m, self.families)

    def sample(self, budget: ComplexityBudget, seed: int) -> ProgramEntry:
        return sample_entry(budget, self.n, self.m, seed, self.families)


def enumerate_entries(
    budget: ComplexityBudget,
    n: int,
    m: "int | Resolution",
    families=(Family.CONSTANT, Family.K_SPARSE),
) -> Iterator[ProgramEntry]:
    """Every entry with description_length <= budget, in canonical order."""
    res = as_resolution(m)
    if budget.max_bits > budget.cap:
        raise BudgetTooLargeError(f"budget {budget.max_bits} bits above cap")
    for block in _family_blocks(budget, n, res.m, families):
        for payload in _iter_block_payloads(block, n, res.m):
            yield ProgramEntry(block.family, payload, n, res)


def count_entries(
    budget: ComplexityBudget,
    n: int,
    m: "int | Resolution",
    families=(Family.CONSTANT, Family.K_SPARSE),
) -> int:
    res = as_resolution(m)
    return sum(b.size for b in _family_blocks(budget, n, res.m, families))


def sample_entry(
    budget: ComplexityBudget,
    n: int,
    m: "int | Resolution",
    seed: int,
    families=(Family.CONSTANT, Family.K_SPARSE),
) -> ProgramEntry:
    """Uniform draw from the enumeration's output set, deterministic in seed."""
    res = as_resolution(m)
    blocks = _family_blocks(budget, n, res.m, families)
    total = sum(b.size for b in blocks)
    if total == 0:
        raise EmptyCodebookError(
            f"no entry fits {budget.max_bits} bits for n={n}, m={res.m}"
        )
    u = int(raw_uint64(derive_seed(seed, _SAMPLE_TAG), 1)[0])
    index = (u * total) >> 64
    for block in blocks:
        if index < block.size:
            return ProgramEntry(block.family, _unrank_block(block, n, res.m, index), n, res)
        index -= block.size
    raise AssertionError("unreachable: index within total")  # pragma: no cover


def entry_id(entry: ProgramEntry) -> str:
    """Compact stable identifier: family:payload_bits:payload_hex."""
    width = max(1, (len(entry.payload) + 3) // 4)
    return f"{entry.generator_id.name}:{len(entry.payload)}:{entry.payload_int:0{width}x}"
