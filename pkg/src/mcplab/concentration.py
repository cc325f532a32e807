"""Monte Carlo verifiers and closed-form tail bounds.

Covers the chi-square concentration lemma (both tails), the normalized
Gaussian dot-product lemma, the largest-singular-value tail, and the five
high-probability events over the difference set of a codebook that drive the
noisy-recovery analysis.

A tail check passes when the empirical complement rate does not exceed the
analytic bound plus three binomial standard errors plus 3/trials; the
additive term keeps zero-hit runs from failing on tiny bounds, and the
binomial term is computed with the bound clamped to [0, 1] (several of the
printed bounds exceed 1 at desk scale and then pass trivially).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr

from .codebook import Codebook, ComplexityBudget, decode
from .rng import derive_seed, normals
from .sensing import batch_top_singular_values, draw_ensemble, noise_vector

__all__ = [
    "MAX_DIFFERENCE_PAIRS",
    "TailCheckReport",
    "EventParams",
    "GaussianDotReport",
    "DifferenceSetTooLargeError",
    "DegenerateSampleError",
    "chi_square_bounds",
    "verify_chi_square",
    "verify_gaussian_dot",
    "verify_sigma_max_tail",
    "event_bounds",
    "verify_events",
    "ks_statistic",
]

MAX_DIFFERENCE_PAIRS = 1_000_000

_EVENT_NAMES = ("E1", "E2", "E3", "E4", "E5")
_TAG_MATRIX_TRIAL = 0x4D
_TAG_NOISE_TRIAL = 0x4E
_TAG_X = 0x58
_TAG_Y = 0x59

_CHUNK = 2048
_MAX_CHUNK_FLOATS = 8_000_000


class DifferenceSetTooLargeError(ValueError):
    """The codebook's difference set exceeds the feasibility cap."""


class DegenerateSampleError(RuntimeError):
    """A zero-norm Gaussian draw (probability zero; treated as an RNG fault)."""


@dataclass(frozen=True)
class TailCheckReport:
    """Empirical tail frequency against its analytic bound."""

    event_name: str
    trials: int
    hits: int
    empirical_rate: float
    analytic_bound: float
    slack_sigmas: float
    passed: bool

    @staticmethod
    def from_counts(event_name: str, trials: int, hits: int, bound: float) -> "TailCheckReport":
        rate = hits / trials
        clamped = min(max(bound, 0.0), 1.0)
        se = math.sqrt(clamped * (1.0 - clamped) / trials)
        slack = (rate - bound) / max(se, 1.0 / trials)
        passed = rate <= bound + 3.0 * se + 3.0 / trials
        return TailCheckReport(event_name, trials, hits, rate, bound, slack, passed)


class GaussianDotReport(NamedTuple):
    n: int
    trials: int
    ks_statistic: float
    ks_critical: float
    independence_corr: float
    corr_critical: float
    passed: bool
    normalized: bool


@dataclass(frozen=True)
class EventParams:
    """Slack parameters t1..t8 plus tau and the oversampling ratio r.

    The E5 triple must satisfy t6 < t7 and 1 + t6 = (1 - t8)(1 + t7).
    """

    t1: float
    t2: float
    t3: float
    t4: float
    t5: float
    t6: float
    t7: float
    t8: float
    tau: float = 0.1
    r: float = 4.0

    def __post_init__(self) -> None:
        for name in ("t2", "t3", "t4", "t5", "t6", "t7", "t8"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not self.t1 > 0:
            raise ValueError("t1 must be > 0")
        if not 0 < self.tau < 1:
            raise ValueError(f"tau must be in (0, 1), got {self.tau}")
        if not self.t4 < 1:
            raise ValueError(f"t4 must be < 1, got {self.t4}")
        if not self.t8 < 1:
            raise ValueError(f"t8 must be < 1, got {self.t8}")
        if not self.r > 1:
            raise ValueError(f"r must be > 1, got {self.r}")
        if not self.t6 < self.t7:
            raise ValueError(f"need t6 < t7, got {self.t6} >= {self.t7}")
        if abs((1 + self.t6) - (1 - self.t8) * (1 + self.t7)) > 1e-12:
            raise ValueError("E5 triple must satisfy 1 + t6 = (1 - t8)(1 + t7)")

    @classmethod
    def for_ratio(
        cls,
        r: float,
        sigma: float,
        d: int,
        kappa_bits: int,
        t3: float = 0.5,
        t5: float = 0.5,
        t7: float = 0.5,
        t8: float = 0.1,
        tau: float = 0.1,
    ) -> "EventParams":
        """The analysis' parameter schedule: t2 = t4 = 1/sqrt(r), t6 from the
        E5 constraint, and t1 = 2 sigma sqrt(d (1 + t2) (2 kappa_bits))."""
        if not r > 1:
            raise ValueError(f"r must be > 1, got {r}")
        t2 = t4 = 1.0 / math.sqrt(r)
        t6 = (1 - t8) * (1 + t7) - 1
        t1 = 2.0 * sigma * math.sqrt(d * (1 + t2) * (2 * kappa_bits))
        if sigma == 0:
            t1 = 1.0  # any positive slack; E1 is vacuous without noise
        return cls(t1=t1, t2=t2, t3=t3, t4=t4, t5=t5, t6=t6, t7=t7, t8=t8, tau=tau, r=r)


def chi_square_bounds(d: int, tau: float) -> tuple[float, float]:
    """Chernoff bounds for both chi-square tails at relative deviation tau.

    lower: P(sum Z_i^2 < d (1 - tau)) <= exp((d/2) (tau + ln(1 - tau)))
    upper: P(sum Z_i^2 > d (1 + tau)) <= exp(-(d/2) (tau - ln(1 + tau)))
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not 0 < tau < 1:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    lower = math.exp(0.5 * d * (tau + math.log1p(-tau)))
    upper = math.exp(-0.5 * d * (tau - math.log1p(tau)))
    return lower, upper


def verify_chi_square(
    d: int, tau: float, trials: int, seed: int
) -> tuple[TailCheckReport, TailCheckReport]:
    """Sample sums of d squared normals and compare both tail rates."""
    lower_bound, upper_bound = chi_square_bounds(d, tau)
    lo_hits = up_hits = 0
    stream = derive_seed(seed, 0xC2)
    for start in range(0, trials, _CHUNK):
        batch = min(_CHUNK, trials - start)
        z = normals(stream, batch * d, start=start * d).reshape(batch, d)
        s = np.einsum("ij,ij->i", z, z)
        lo_hits += int(np.count_nonzero(s < d * (1.0 - tau)))
        up_hits += int(np.count_nonzero(s > d * (1.0 + tau)))
    return (
        TailCheckReport.from_counts(f"CHI2_LOWER_d{d}", trials, lo_hits, lower_bound),
        TailCheckReport.from_counts(f"CHI2_UPPER_d{d}", trials, up_hits, upper_bound),
    )


def ks_statistic(samples: np.ndarray) -> float:
    """One-sample Kolmogorov-Smirnov distance to the standard normal."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    cdf = ndtr(x)
    grid = np.arange(n, dtype=np.float64)
    d_plus = np.max((grid + 1.0) / n - cdf)
    d_minus = np.max(cdf - grid / n)
    return float(max(d_plus, d_minus))


def verify_gaussian_dot(
    n: int, trials: int, seed: int, normalized: bool = True
) -> GaussianDotReport:
    """Check that X'Y / ||X|| is standard normal and independent of ||X||.

    With normalized=False the raw dot product X'Y is tested instead; that is
    the negative control and is expected to fail the KS test for n >= 2.
    Pass requires KS < 1.63/sqrt(trials) (asymptotic alpha = 0.01) and
    |corr(|T|, ||X||)| < 4/sqrt(trials).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    seed_x = derive_seed(seed, _TAG_X)
    seed_y = derive_seed(seed, _TAG_Y)
    t_values = np.empty(trials)
    x_norms = np.empty(trials)
    for start in range(0, trials, _CHUNK):
        batch = min(_CHUNK, trials - start)
        x = normals(seed_x, batch * n, start=start * n).reshape(batch, n)
        y = normals(seed_y, batch * n, start=start * n).reshape(batch, n)
        norms = np.linalg.norm(x, axis=1)
        if np.any(norms == 0):
            raise DegenerateSampleError("zero-norm Gaussian vector")
        dots = np.einsum("ij,ij->i", x, y)
        t_values[start : start + batch] = dots / norms if normalized else dots
        x_norms[start : start + batch] = norms
    ks = ks_statistic(t_values)
    corr = float(np.corrcoef(np.abs(t_values), x_norms)[0, 1])
    ks_critical = 1.63 / math.sqrt(trials)
    corr_critical = 4.0 / math.sqrt(trials)
    passed = ks < ks_critical and abs(corr) < corr_critical
    return GaussianDotReport(
        n, trials, ks, ks_critical, corr, corr_critical, passed, normalized
    )


def verify_sigma_max_tail(
    d: int, n: int, t3: float, trials: int, seed: int
) -> TailCheckReport:
    """Empirical P(sigma_max >= (1 + t3) sqrt(d) + sqrt(n)) vs exp(-d t3^2 / 2)."""
    if not t3 > 0:
        raise ValueError(f"t3 must be > 0, got {t3}")
    threshold = (1.0 + t3) * math.sqrt(d) + math.sqrt(n)
    bound = math.exp(-0.5 * d * t3 * t3)
    hits = 0
    stream = derive_seed(seed, 0x53)
    chunk = max(1, min(512, _MAX_CHUNK_FLOATS // (d * n)))
    for start in range(0, trials, chunk):
        batch = min(chunk, trials - start)
        a = normals(stream, batch * d * n, start=start * d * n).reshape(batch, d, n)
        if d <= n:
            grams = a @ np.transpose(a, (0, 2, 1))
        else:
            grams = np.transpose(a, (0, 2, 1)) @ a
        del a
        top = batch_top_singular_values(grams, seed=derive_seed(seed, 0x54))
        hits += int(np.count_nonzero(top >= threshold))
        del grams
    return TailCheckReport.from_counts(
        f"SIGMA_MAX_d{d}_n{n}", trials, hits, bound
    )


def event_bounds(
    params: EventParams, d: int, n: int, kappa_bits: int, sigma: float
) -> dict[str, float]:
    """Closed-form complement-probability bounds for the five events.

    E4 is evaluated with exponent -(d/2)(t5 - ln(1 + t5)), the symmetric
    upper-tail form of the chi-square lemma.  With the schedule's t1 the E1
    bound is independent of sigma (the sigma factors cancel); sigma = 0
    degenerates the second E1 summand to 0.
    """
    if kappa_bits < 1:
        raise ValueError(f"kappa_bits must be >= 1, got {kappa_bits}")
    if d < 1 or n < 1:
        raise ValueError("d and n must be >= 1")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    size = 2.0 ** (2 * kappa_bits)
    if sigma > 0:
        noise_term = math.exp(-params.t1**2 / (2.0 * sigma**2 * d * (1 + params.t2)))
    else:
        noise_term = 0.0
    e1 = size * (math.exp(-0.5 * d * params.t2**2) + noise_term)
    e2 = math.exp(-0.5 * d * params.t3**2)
    e3 = size * math.exp(0.5 * d * (params.t4 + math.log1p(-params.t4)))
    e4 = size * math.exp(-0.5 * d * (params.t5 - math.log1p(params.t5)))
    e5 = math.exp(-0.5 * n * (params.t7 - math.log1p(params.t7))) + math.exp(
        0.5 * d * (params.t8 + math.log1p(-params.t8))
    )
    return {"E1": e1, "E2": e2, "E3": e3, "E4": e4, "E5": e5}


def difference_rows(codebook: Codebook, budget: ComplexityBudget) -> np.ndarray:
    """Distinct nonzero pairwise differences of decoded signals, one per
    +/- pair (all five events are sign-invariant), as float rows."""
    m = codebook.m.m
    grids = {
        tuple(decode(entry).grid_indices().tolist())
        for entry in codebook.entries(budget)
    }
    unique = np.array(sorted(grids), dtype=np.int64)
    count = unique.shape[0]
    if count * count > MAX_DIFFERENCE_PAIRS:
        raise DifferenceSetTooLargeError(
            f"{count}^2 = {count * count} difference pairs exceed cap "
            f"{MAX_DIFFERENCE_PAIRS}"
        )
    diff = (unique[:, None, :] - unique[None, :, :]).reshape(-1, codebook.n)
    diff = diff[np.any(diff != 0, axis=1)]
    first = np.argmax(diff != 0, axis=1)
    signs = np.sign(diff[np.arange(diff.shape[0]), first])
    diff = diff * signs[:, None]
    diff = np.unique(diff, axis=0)
    return diff.astype(np.float64) * 2.0**-m


def verify_events(
    params: EventParams,
    codebook: Codebook,
    budget: ComplexityBudget,
    d: int,
    sigma: float,
    trials: int,
    seed: int,
) -> list[TailCheckReport]:
    """Per-trial exact evaluation of E1..E5 over the difference set.

    Draws a fresh ensemble and noise vector per trial, checks each event's
    complement exactly over every nonzero difference (the zero difference
    holds vacuously), and appends an E_ANY union report mirroring the final
    union bound.
    """
    n = codebook.n
    h = difference_rows(codebook, budget)
    h_norm2 = np.einsum("ij,ij->i", h, h)
    h_norm = np.sqrt(h_norm2)
    kappa_bits = budget.max_bits
    bounds = event_bounds(params, d, n, kappa_bits, sigma)
    hits = {name: 0 for name in _EVENT_NAMES}
    union_hits = 0

    chunk = 16
    row_block = 16384
    for start in range(0, trials, chunk):
        batch = min(chunk, trials - start)
        mats = []
        noise = np.empty((batch, d))
        for j in range(batch):
            k = start + j
            mats.append(draw_ensemble(d, n, derive_seed(seed, k, _TAG_MATRIX_TRIAL)).entries)
            noise[j] = sigma * noise_vector(derive_seed(seed, k, _TAG_NOISE_TRIAL), d)
        grams = np.stack([a.T @ a for a in mats])  # (batch, n, n)
        back = np.stack([a.T @ w for a, w in zip(mats, noise)])  # (batch, n)

        fail1 = np.zeros(batch, dtype=bool)
        fail3 = np.zeros(batch, dtype=bool)
        fail4 = np.zeros(batch, dtype=bool)
        if h.shape[0]:
            corr = np.abs(h @ back.T)  # (rows, batch)
            fail1 = np.any(corr > params.t1 * h_norm[:, None], axis=0)
            gcat = grams.transpose(1, 0, 2).reshape(n, batch * n)
            lo = (1.0 - params.t4) * d * h_norm2
            hi = (1.0 + params.t5) * d * h_norm2
            for r0 in range(0, h.shape[0], row_block):
                hb = h[r0 : r0 + row_block]
                quad = np.einsum(
                    "kcn,kn->kc",
                    (hb @ gcat).reshape(hb.shape[0], batch, n),
                    hb,
                )
                fail3 |= np.any(quad <= lo[r0 : r0 + row_block, None], axis=0)
                fail4 |= np.any(quad >= hi[r0 : r0 + row_block, None], axis=0)

        top = batch_top_singular_values(grams, seed=derive_seed(seed, 0x55))
        fail2 = top >= (1.0 + params.t3) * math.sqrt(d) + math.sqrt(n)
        fail5 = np.einsum("ij,ij->i", back, back) > n * d * (1.0 + params.t6)

        for name, fails in zip(_EVENT_NAMES, (fail1, fail2, fail3, fail4, fail5)):
            hits[name] += int(np.count_nonzero(fails))
        union_hits += int(np.count_nonzero(fail1 | fail2 | fail3 | fail4 | fail5))

    reports = [
        TailCheckReport.from_counts(name, trials, hits[name], bounds[name])
        for name in _EVENT_NAMES
    ]
    reports.append(
        TailCheckReport.from_counts(
            "E_ANY", trials, union_hits, sum(bounds.values())
        )
    )
    return reports
