"""Exhaustive minimum-complexity recovery over a codebook.

Two programs, both solved exactly by scanning the canonical enumeration:

  noiseless  minimize description length subject to ||A x - y|| <= delta;
  noisy      minimize ||A x - y|| subject to description length <= budget.

Because enumeration is ordered by description length first, the noiseless
solver can stop at the first feasible entry; ties (equal length or equal
residual, including distinct entries that decode to the same signal) resolve
to the earliest entry in canonical order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .codebook import (
    Codebook,
    ComplexityBudget,
    EmptyCodebookError,
    ProgramEntry,
    decode,
    description_length,
)
from .quantize import QuantizedSignal, quantize_vector
from .sensing import MeasurementRecord, SensingEnsemble

__all__ = [
    "FeasibilityTolerance",
    "RecoveryResult",
    "ReconstructionError",
    "NoFeasibleCandidateError",
    "default_noiseless_delta",
    "solve_noiseless",
    "solve_noisy",
    "reconstruction_error",
]


class NoFeasibleCandidateError(RuntimeError):
    """The budget/tolerance pair excludes every candidate."""


@dataclass(frozen=True)
class FeasibilityTolerance:
    """Residual slack absorbing floating-point error in the equality constraint."""

    delta: float

    def __post_init__(self) -> None:
        if not self.delta >= 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")


@dataclass(frozen=True)
class RecoveryResult:
    entry: ProgramEntry
    x_hat: QuantizedSignal
    residual: float
    complexity_bits: int
    candidates_scored: int


class ReconstructionError(NamedTuple):
    l2: float
    l2_per_element: float
    quantized_l2: float


def default_noiseless_delta(y: np.ndarray) -> float:
    """1e-9 * max(1, ||y||): scale-aware floating-point slack."""
    return 1e-9 * max(1.0, float(np.linalg.norm(y)))


def _check_shapes(ensemble: SensingEnsemble, codebook: Codebook, d: int) -> None:
    if codebook.n != ensemble.n:
        raise ValueError(f"codebook n={codebook.n} != ensemble n={ensemble.n}")
    if d != ensemble.d:
        raise ValueError(f"measurement length {d} != ensemble d={ensemble.d}")


def solve_noiseless(
    ensemble: SensingEnsemble,
    y: np.ndarray,
    codebook: Codebook,
    budget: ComplexityBudget,
    tol: FeasibilityTolerance | None = None,
) -> RecoveryResult:
    """Shortest-description entry whose image matches y within tolerance."""
    y = np.asarray(y, dtype=np.float64)
    _check_shapes(ensemble, codebook, y.size)
    if tol is None:
        tol = FeasibilityTolerance(default_noiseless_delta(y))
    a = ensemble.entries
    scored = 0
    for entry in codebook.entries(budget):
        scored += 1
        x = decode(entry)
        residual = float(np.linalg.norm(y - a @ x.values))
        if residual <= tol.delta:
            return RecoveryResult(
                entry=entry,
                x_hat=x,
                residual=residual,
                complexity_bits=description_length(entry),
                candidates_scored=scored,
            )
    raise NoFeasibleCandidateError(
        f"no candidate within delta={tol.delta!r} under {budget.max_bits} bits "
        f"({scored} scored)"
    )


def solve_noisy(
    ensemble: SensingEnsemble,
    record: MeasurementRecord,
    codebook: Codebook,
    budget: ComplexityBudget,
) -> RecoveryResult:
    """Minimum-residual entry within the complexity budget."""
    _check_shapes(ensemble, codebook, record.d)
    a = ensemble.entries
    y = record.y
    best: RecoveryResult | None = None
    scored = 0
    for entry in codebook.entries(budget):
        scored += 1
        x = decode(entry)
        residual = float(np.linalg.norm(y - a @ x.values))
        if best is None or residual < best.residual:
            best = RecoveryResult(
                entry=entry,
                x_hat=x,
                residual=residual,
                complexity_bits=description_length(entry),
                candidates_scored=scored,
            )
    if best is None:
        raise EmptyCodebookError(
            f"no entry fits {budget.max_bits} bits for n={codebook.n}"
        )
    return RecoveryResult(
        entry=best.entry,
        x_hat=best.x_hat,
        residual=best.residual,
        complexity_bits=best.complexity_bits,
        candidates_scored=scored,
    )


def reconstruction_error(result: RecoveryResult, truth: np.ndarray) -> ReconstructionError:
    """(l2, l2 / sqrt(n), l2 of the m-bit quantized difference)."""
    truth = np.asarray(truth, dtype=np.float64)
    x_hat = result.x_hat.values
    if truth.shape != x_hat.shape:
        raise ValueError(f"truth shape {truth.shape} != estimate shape {x_hat.shape}")
    diff = truth - x_hat
    l2 = float(np.linalg.norm(diff))
    truth_q = quantize_vector(truth, result.x_hat.resolution)
    quantized_l2 = float(np.linalg.norm(x_hat - truth_q.values))
    return ReconstructionError(l2, l2 / math.sqrt(truth.size), quantized_l2)
