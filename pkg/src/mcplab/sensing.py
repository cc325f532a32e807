"""Gaussian measurement ensembles, the noisy channel, and spectral utilities.

Matrix entries are i.i.d. standard normals drawn from the counter-based
generator, keyed by purpose-tagged seeds so that a noise stream is
decorrelated from a matrix stream even when the caller reuses the same raw
integer seed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import derive_seed, normals

__all__ = [
    "MAX_ENSEMBLE_ENTRIES",
    "SensingEnsemble",
    "MeasurementRecord",
    "SizeOverflowError",
    "PowerIterationError",
    "draw_ensemble",
    "measure",
    "measure_noisy",
    "sigma_max",
    "save_ensemble",
    "load_ensemble",
]

MAX_ENSEMBLE_ENTRIES = 50_000_000

_TAG_MATRIX = 0x11
_TAG_NOISE = 0x22
_START_VECTOR_SEED = 0x51C3A7


class SizeOverflowError(ValueError):
    """Requested ensemble exceeds the memory cap."""


class PowerIterationError(RuntimeError):
    """Power iteration hit its iteration cap before converging."""


@dataclass(frozen=True, eq=False)
class SensingEnsemble:
    """d x n matrix of i.i.d. N(0, 1) entries, reproducible from (d, n, seed)."""

    d: int
    n: int
    seed: int
    entries: np.ndarray

    def __eq__(self, other) -> bool:
        if not isinstance(other, SensingEnsemble):
            return NotImplemented
        return (self.d, self.n, self.seed) == (other.d, other.n, other.seed) and (
            np.array_equal(self.entries, other.entries)
        )

    def __post_init__(self) -> None:
        if self.entries.shape != (self.d, self.n):
            raise ValueError(
                f"entries shape {self.entries.shape} != ({self.d}, {self.n})"
            )
        entries = np.ascontiguousarray(self.entries, dtype=np.float64)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """y = A x + sigma * g with g drawn deterministically from noise_seed."""

    y: np.ndarray
    sigma: float
    noise_seed: int

    def __eq__(self, other) -> bool:
        if not isinstance(other, MeasurementRecord):
            return NotImplemented
        return (self.sigma, self.noise_seed) == (other.sigma, other.noise_seed) and (
            np.array_equal(self.y, other.y)
        )

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        y = np.asarray(self.y, dtype=np.float64)
        if y.ndim != 1:
            raise ValueError("y must be a 1-d vector")
        y = y.copy()
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def d(self) -> int:
        return int(self.y.size)


def draw_ensemble(d: int, n: int, seed: int) -> SensingEnsemble:
    """Draw the d x n standard-normal ensemble for a seed, bit-reproducibly."""
    if d < 1 or n < 1:
        raise ValueError(f"matrix dimensions must be >= 1, got {d} x {n}")
    if d * n > MAX_ENSEMBLE_ENTRIES:
        raise SizeOverflowError(
            f"{d} x {n} = {d * n} entries exceeds cap {MAX_ENSEMBLE_ENTRIES}"
        )
    entries = normals(derive_seed(seed, _TAG_MATRIX), d * n).reshape(d, n)
    return SensingEnsemble(d=d, n=n, seed=seed, entries=entries)


def measure(ensemble: SensingEnsemble, x: np.ndarray) -> np.ndarray:
    """Exact matrix-vector product A x."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (ensemble.n,):
        raise ValueError(f"signal shape {x.shape} incompatible with n={ensemble.n}")
    return ensemble.entries @ x


def measure_noisy(
    ensemble: SensingEnsemble, x: np.ndarray, sigma: float, noise_seed: int
) -> MeasurementRecord:
    """A x plus white Gaussian noise of standard deviation sigma."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    y = measure(ensemble, x)
    if sigma > 0:
        y = y + sigma * noise_vector(noise_seed, ensemble.d)
    return MeasurementRecord(y=y, sigma=float(sigma), noise_seed=noise_seed)


def noise_vector(noise_seed: int, d: int) -> np.ndarray:
    """The unit-variance noise draw underlying measure_noisy."""
    return normals(derive_seed(noise_seed, _TAG_NOISE), d)


def sigma_max(
    ensemble_or_matrix, tol: float = 1e-10, max_iter: int = 10_000
) -> float:
    """Largest singular value by power iteration on the smaller Gram matrix.

    Stops when successive Rayleigh quotients agree to relative tol; raises
    PowerIterationError if the cap is reached first (never silently
    truncates).
    """
    a = (
        ensemble_or_matrix.entries
        if isinstance(ensemble_or_matrix, SensingEnsemble)
        else np.asarray(ensemble_or_matrix, dtype=np.float64)
    )
    if a.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    gram = a @ a.T if a.shape[0] <= a.shape[1] else a.T @ a
    k = gram.shape[0]
    v = normals(_START_VECTOR_SEED, k)
    v /= np.linalg.norm(v)
    theta_prev = None
    for _ in range(max_iter):
        w = gram @ v
        theta = float(v @ w)
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            return 0.0
        v = w / norm_w
        if theta_prev is not None and abs(theta - theta_prev) <= tol * abs(theta):
            return float(np.sqrt(max(theta, 0.0)))
        theta_prev = theta
    raise PowerIterationError(
        f"no convergence to rel tol {tol} within {max_iter} iterations"
    )


def batch_top_singular_values(
    grams: np.ndarray,
    tol: float = 1e-9,
    max_iter: int = 10_000,
    block: int = 4,
    seed: int = _START_VECTOR_SEED,
) -> np.ndarray:
    """Top singular values for a batch of Gram matrices (B, k, k).

    Subspace (block) power iteration: the top Ritz value converges at the
    (lambda_{block+1} / lambda_1)^2 rate, so nearly degenerate top pairs do
    not stall the way single-vector iteration does.  Returns sqrt of the top
    eigenvalue per matrix.
    """
    grams = np.asarray(grams, dtype=np.float64)
    batch, k, _ = grams.shape
    block = min(block, k)
    q = normals(seed, batch * k * block).reshape(batch, k, block)
    q, _ = np.linalg.qr(q)
    theta_prev = None
    for _ in range(max_iter):
        y = grams @ q
        ritz = np.transpose(q, (0, 2, 1)) @ y
        theta = np.linalg.eigvalsh(ritz)[:, -1]
        q, _ = np.linalg.qr(y)
        if theta_prev is not None and np.all(
            np.abs(theta - theta_prev) <= tol * np.maximum(np.abs(theta), 1e-300)
        ):
            return np.sqrt(np.maximum(theta, 0.0))
        theta_prev = theta
    raise PowerIterationError(
        f"batched iteration: no convergence to rel tol {tol} in {max_iter} steps"
    )


_MAGIC = b"SENSMAT1"


def save_ensemble(ensemble: SensingEnsemble, path) -> None:
    """Write the documented little-endian layout: magic, d, n, seed, row-major
    float64 body."""
    header = struct.pack("<8sIIQ", _MAGIC, ensemble.d, ensemble.n, ensemble.seed)
    Path(path).write_bytes(header + ensemble.entries.astype("<f8").tobytes(order="C"))


def load_ensemble(path) -> SensingEnsemble:
    """Read the binary layout back and verify it matches its seed."""
    blob = Path(path).read_bytes()
    if len(blob) < 24 or blob[:8] != _MAGIC:
        raise ValueError(f"{path}: not a sensing-matrix file")
    _, d, n, seed = struct.unpack("<8sIIQ", blob[:24])
    body = np.frombuffer(blob[24:], dtype="<f8")
    if body.size != d * n:
        raise ValueError(f"{path}: body holds {body.size} floats, expected {d * n}")
    entries = body.reshape(d, n)
    expected = draw_ensemble(d, n, seed)
    if not np.array_equal(entries, expected.entries):
        raise ValueError(f"{path}: entries do not match seed {seed}")
    return expected
