"""Closed-form recovery-bound calculators.

All logarithms are natural.  kappa_bits is the description-length budget in
bits (the complexity dimension kappa times the resolution m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

__all__ = [
    "BoundInputs",
    "Theorem1Bound",
    "GammaConstants",
    "theorem1_rhs",
    "theorem2_bound",
    "stability_rho",
    "gamma_constants",
]


@dataclass(frozen=True)
class BoundInputs:
    """Inputs shared by the bound calculators."""

    kappa_bits: int
    m: int
    n: int
    d: int
    tau: float
    t: float
    sigma: float = 0.0
    r: float = 4.0

    def __post_init__(self) -> None:
        if self.kappa_bits < 1 or self.m < 1 or self.n < 1 or self.d < 1:
            raise ValueError("kappa_bits, m, n, d must all be >= 1")
        if not 0 < self.tau <= 1:
            raise ValueError(f"tau must be in (0, 1], got {self.tau}")
        if self.t < 0:
            raise ValueError(f"t must be >= 0, got {self.t}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


class Theorem1Bound(NamedTuple):
    threshold: float
    probability_bound: float


class GammaConstants(NamedTuple):
    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float


def theorem1_rhs(b: BoundInputs) -> Theorem1Bound:
    """Noiseless recovery bound.

    threshold          (sqrt(n/d + t + 1) + 1) / tau * sqrt(n 2^(-2m+2))
    probability_bound  2^(2 kappa_bits) e^((d/2)(1 - tau^2 + 2 ln tau))
                       + e^(-(d/2) t^2)
    """
    threshold = (
        (math.sqrt(b.n / b.d + b.t + 1.0) + 1.0)
        / b.tau
        * math.sqrt(b.n * 2.0 ** (-2 * b.m + 2))
    )
    probability = 2.0 ** (2 * b.kappa_bits) * math.exp(
        0.5 * b.d * (1.0 - b.tau**2 + 2.0 * math.log(b.tau))
    ) + math.exp(-0.5 * b.d * b.t**2)
    return Theorem1Bound(threshold, probability)


def stability_rho(r: float) -> float:
    """rho = (1 - 1/sqrt(r))^2 / 2 for oversampling ratio r > 1."""
    if not r > 1:
        raise ValueError(f"r must be > 1, got {r}")
    return (1.0 - 1.0 / math.sqrt(r)) ** 2 / 2.0


def theorem2_bound(kappa_bits: int, sigma: float, d: int, r: float) -> float:
    """Noisy recovery bound on the squared error: 2 kappa_bits sigma^2 / (rho d)."""
    if kappa_bits < 1 or d < 1:
        raise ValueError("kappa_bits and d must be >= 1")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    return 2.0 * kappa_bits * sigma**2 / (stability_rho(r) * d)


def gamma_constants(
    t2: float, t3: float, t4: float, t5: float, t6: float
) -> GammaConstants:
    """gamma1 = sqrt(1+t5)(1+t3)/(1-t4), gamma2 = sqrt(1+t5)/(1-t4),
    gamma3 = sqrt(1+t2)/(1-t4), gamma4 = sqrt(1+t6)/(1-t4)."""
    for name, value in (("t2", t2), ("t3", t3), ("t4", t4), ("t5", t5), ("t6", t6)):
        if value < 0:
            raise ValueError(f"{name} must be >= 0, got {value}")
    if not t4 < 1:
        raise ValueError(f"t4 must be < 1, got {t4}")
    inv = 1.0 / (1.0 - t4)
    return GammaConstants(
        gamma1=math.sqrt(1.0 + t5) * (1.0 + t3) * inv,
        gamma2=math.sqrt(1.0 + t5) * inv,
        gamma3=math.sqrt(1.0 + t2) * inv,
        gamma4=math.sqrt(1.0 + t6) * inv,
    )
