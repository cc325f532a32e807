"""Computable description-length upper bounds for arbitrary quantized signals.

These estimators code signals that need not belong to any codebook family.
Each is an achievable code length within its own scheme, so each is an upper
bound witness for the signal's complexity; ``best_estimate`` takes the
minimum over the registered schemes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .codebook import HEADER_BITS
from .quantize import QuantizedSignal, signal_bits

__all__ = [
    "EstimatorId",
    "ComplexityEstimate",
    "raw_length",
    "lz78_length",
    "sparse_length",
    "best_estimate",
]


class EstimatorId(enum.Enum):
    LZ78 = "LZ78"
    SPARSE = "SPARSE"
    RAW = "RAW"


@dataclass(frozen=True)
class ComplexityEstimate:
    bits: int
    estimator_id: EstimatorId

    def __post_init__(self) -> None:
        if self.bits < 1:
            raise ValueError(f"estimate must be >= 1 bit, got {self.bits}")

    def dimension(self, m: int) -> float:
        """Complexity dimension: bits per resolution bit."""
        return self.bits / m


def raw_length(sig: QuantizedSignal) -> ComplexityEstimate:
    """Incompressible baseline: n*m literal bits plus the scheme header."""
    return ComplexityEstimate(sig.n * sig.resolution.m + HEADER_BITS, EstimatorId.RAW)


def _ceil_log2(k: int) -> int:
    return (k - 1).bit_length()


def lz78_length(sig: QuantizedSignal) -> ComplexityEstimate:
    """Incremental-parsing code length of the signal's n*m expansion bits.

    Each phrase extends a previously seen phrase by one bit.  Phrase j
    (1-indexed) is coded as an index into the dictionary as it stands after
    insertion, counting the empty root phrase and one reserved index, so it
    costs ceil(log2(j + 2)) bits.  The dictionary is never reset; a trailing
    partial phrase is charged like a full one.
    """
    bits = signal_bits(sig)
    children: dict[tuple[int, int], int] = {}
    next_node = 1
    node = 0
    phrases = 0
    cost = 0
    for b in bits:
        key = (node, int(b))
        child = children.get(key)
        if child is not None:
            node = child
            continue
        children[key] = next_node
        next_node += 1
        phrases += 1
        cost += _ceil_log2(phrases + 2)
        node = 0
    if node != 0:
        phrases += 1
        cost += _ceil_log2(phrases + 2)
    return ComplexityEstimate(cost + HEADER_BITS, EstimatorId.LZ78)


def sparse_length(sig: QuantizedSignal) -> ComplexityEstimate:
    """Position/value code: 8 + cl2(n+1) + k * (cl2(n) + m) bits for k nonzeros."""
    n, m = sig.n, sig.resolution.m
    k = int(np.count_nonzero(sig.values))
    bits = HEADER_BITS + _ceil_log2(n + 1) + k * (_ceil_log2(n) + m)
    return ComplexityEstimate(bits, EstimatorId.SPARSE)


_ESTIMATORS = (lz78_length, sparse_length, raw_length)


def best_estimate(sig: QuantizedSignal) -> ComplexityEstimate:
    """Minimum bits over all registered estimators (ties keep the first)."""
    return min((est(sig) for est in _ESTIMATORS), key=lambda e: e.bits)
