"""Counter-based deterministic random numbers.

Every random quantity in the package is a pure function of a 64-bit seed and
a stream position: position k of stream s is ``mix64(s + (k + 1) * GOLDEN)``
where ``mix64`` is the SplitMix64 finalizer.  There is no hidden generator
state, so streams are bit-reproducible across platforms, independent of
evaluation order, and trivially parallel.

Gaussian variates come from a Box-Muller transform applied to consecutive
pairs of the uniform stream, so ``normals(seed, count, start)`` windows are
consistent slices of one infinite stream.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_seed", "raw_uint64", "uniform01", "normals"]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_STIR = 0xD1B54A32D192ED03
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *parts: int) -> int:
    """Fold integer components (trial index, purpose tag, ...) into a child seed.

    Children of distinct part tuples are decorrelated, so inserting or
    reordering trials never perturbs the streams of other trials.
    """
    h = _mix64(base + _GOLDEN)
    for i, p in enumerate(parts):
        h = _mix64((h + _GOLDEN) ^ _mix64(p + (i + 1) * _STIR))
    return h


def raw_uint64(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Positions ``start .. start+count-1`` of the 64-bit stream for ``seed``."""
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    idx = np.arange(start, start + count, dtype=np.uint64)
    z = np.uint64(seed & _MASK64) + (idx + np.uint64(1)) * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_A)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_B)
    return z ^ (z >> np.uint64(31))


def uniform01(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Uniforms on the open interval (0, 1); never exactly 0 or 1."""
    bits = raw_uint64(seed, count, start)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normals(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Standard normals via Box-Muller over uniform pairs (2j, 2j+1)."""
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if count == 0:
        return np.empty(0, dtype=np.float64)
    p0 = start // 2
    p1 = (start + count - 1) // 2
    u = uniform01(seed, 2 * (p1 - p0 + 1), start=2 * p0)
    radius = np.sqrt(-2.0 * np.log(u[0::2]))
    angle = (2.0 * np.pi) * u[1::2]
    out = np.empty(u.size, dtype=np.float64)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    off = start - 2 * p0
    return out[off : off + count]
