"""Binary expansion and m-bit truncation of real vectors in [0, 1]^n.

A value x in [0, 1] is truncated to the dyadic grid {k * 2^-m : 0 <= k < 2^m}
by keeping the first m bits of its binary expansion, so 0 <= x - [x]_m < 2^-m
for x < 1.  The endpoint uses the all-ones convention [1]_m = 1 - 2^-m, where
the gap is exactly 2^-m.

All grid points are exact float64 values because m is capped at 53 bits, and
scaling a float by a power of two is exact, so the arithmetic below never
rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MAX_BITS_PER_COORDINATE",
    "DomainError",
    "Resolution",
    "QuantizedSignal",
    "as_resolution",
    "binary_expansion",
    "truncate",
    "quantize_vector",
    "quantization_error_bound",
    "signal_bits",
]

# Beyond 53 bits the grid points k * 2^-m stop being exact float64 values.
MAX_BITS_PER_COORDINATE = 53

# Inputs may overshoot [0, 1] by one ulp of 1.0 before it counts as a domain
# error; anything inside the window is clamped.
_EDGE_TOLERANCE = 2.0**-52


class DomainError(ValueError):
    """A coordinate lies outside [0, 1] beyond the one-ulp tolerance."""


@dataclass(frozen=True)
class Resolution:
    """Bit depth of the dyadic grid (m bits per coordinate)."""

    m: int

    def __post_init__(self) -> None:
        if not isinstance(self.m, int) or isinstance(self.m, bool):
            raise TypeError(f"resolution must be an integer, got {self.m!r}")
        if not 1 <= self.m <= MAX_BITS_PER_COORDINATE:
            raise ValueError(
                f"resolution must be in [1, {MAX_BITS_PER_COORDINATE}], got {self.m}"
            )

    @property
    def step(self) -> float:
        """Grid spacing 2^-m."""
        return 2.0**-self.m

    @classmethod
    def for_length(cls, n: int) -> "Resolution":
        """Default depth ceil(ln n) for a length-n signal (natural log), min 1."""
        if n < 1:
            raise ValueError(f"signal length must be >= 1, got {n}")
        return cls(max(1, math.ceil(math.log(n))))


def as_resolution(m: "int | Resolution") -> Resolution:
    return m if isinstance(m, Resolution) else Resolution(m)


@dataclass(frozen=True, eq=False)
class QuantizedSignal:
    """Length-n vector whose every coordinate sits on the 2^m dyadic grid."""

    values: np.ndarray
    resolution: Resolution

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuantizedSignal):
            return NotImplemented
        return self.resolution == other.resolution and np.array_equal(
            self.values, other.values
        )

    def __hash__(self) -> int:
        return hash((self.resolution, self.values.tobytes()))

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("signal must be a non-empty 1-d vector")
        scaled = values * 2.0**self.resolution.m
        on_grid = np.floor(scaled) == scaled
        in_range = (scaled >= 0) & (scaled <= 2**self.resolution.m - 1)
        bad = np.flatnonzero(~(on_grid & in_range))
        if bad.size:
            raise ValueError(
                f"coordinate {bad[0]} = {values[bad[0]]!r} is not an "
                f"m={self.resolution.m} grid value"
            )
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def grid_indices(self) -> np.ndarray:
        """Integer grid coordinates k with values = k * 2^-m."""
        return (self.values * 2.0**self.resolution.m).astype(np.int64)


def _check_domain(x: float) -> float:
    if not (-_EDGE_TOLERANCE <= x <= 1.0 + _EDGE_TOLERANCE):
        raise DomainError(f"value {x!r} outside [0, 1]")
    return min(max(x, 0.0), 1.0)


def _grid_index(x: float, m: int) -> int:
    x = _check_domain(x)
    # [1]_m = 1 - 2^-m: clamp the expansion argument strictly below 1.  The
    # final min() also covers m = 53 where 1 - 2^-54 rounds back to 1.0.
    clipped = min(x, 1.0 - 2.0 ** (-m - 1))
    return min(int(math.floor(clipped * 2.0**m)), (1 << m) - 1)


def binary_expansion(x: float, m: "int | Resolution") -> np.ndarray:
    """First m bits of the binary expansion of x, most significant first.

    Bit i is floor(2^i * x) mod 2 (dyadic rationals take the terminating
    expansion), except at the upper endpoint where [1]_m = 1 - 2^-m forces
    all ones.
    """
    res = as_resolution(m)
    k = _grid_index(float(x), res.m)
    return np.array(
        [(k >> shift) & 1 for shift in range(res.m - 1, -1, -1)], dtype=np.uint8
    )


def truncate(x: float, m: "int | Resolution") -> float:
    """m-bit truncation sum_{i<=m} 2^-i (x)_i, exact in float64."""
    res = as_resolution(m)
    return _grid_index(float(x), res.m) * 2.0**-res.m


def quantize_vector(x, m: "int | Resolution") -> QuantizedSignal:
    """Coordinate-wise truncation of a vector in [0, 1]^n."""
    res = as_resolution(m)
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("input must be a non-empty 1-d vector")
    bad = np.flatnonzero((arr < -_EDGE_TOLERANCE) | (arr > 1.0 + _EDGE_TOLERANCE))
    if bad.size:
        raise DomainError(f"coordinate {bad[0]} = {arr[bad[0]]!r} outside [0, 1]")
    clipped = np.minimum(np.clip(arr, 0.0, 1.0), 1.0 - 2.0 ** (-res.m - 1))
    k = np.minimum(np.floor(clipped * 2.0**res.m), float(2**res.m - 1))
    return QuantizedSignal(values=k * 2.0**-res.m, resolution=res)


def quantization_error_bound(n: int, m: "int | Resolution") -> float:
    """sqrt(n * 2^(-2m+2)): bounds the l2 distance between the quantization
    error vectors of any two signals in [0, 1]^n."""
    res = as_resolution(m)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return math.sqrt(n * 2.0 ** (-2 * res.m + 2))


def signal_bits(sig: QuantizedSignal) -> np.ndarray:
    """Concatenated expansion bits of all coordinates (m bits each, MSB first)."""
    m = sig.resolution.m
    k = sig.grid_indices()
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    return ((k[:, None] >> shifts[None, :]) & 1).astype(np.uint8).ravel()
