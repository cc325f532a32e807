"""Experiment configuration: a strict JSON schema with deterministic defaults.

Unknown keys are rejected so a typo cannot silently fall back to a default.
When m is omitted it resolves to ceil(ln n) per signal length (natural log;
the choice is recorded in the emitted metadata as m_rule).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .codebook import Family

__all__ = ["ConfigError", "ExperimentConfig", "EXPERIMENT_IDS", "D_RULES"]

EXPERIMENT_IDS = ("NOISELESS_SCALING", "PER_ELEMENT", "STABILITY", "LEMMAS")
D_RULES = ("D_EQ_KAPPA_LOG_N", "D_EQ_3KAPPA", "D_EQ_8R_KAPPA_M")

_KNOWN_KEYS = {
    "experiment_id",
    "n",
    "m",
    "d",
    "d_rule",
    "families",
    "budget_bits",
    "sigma",
    "r",
    "trials",
    "base_seed",
    "tau",
    "t",
    "epsilon",
}


class ConfigError(ValueError):
    """Configuration file or field rejected."""


def _as_int_list(value, key: str) -> tuple[int, ...]:
    items = value if isinstance(value, list) else [value]
    out = []
    for item in items:
        if not isinstance(item, int) or isinstance(item, bool):
            raise ConfigError(f"{key} must be an integer or list of integers")
        out.append(item)
    if not out:
        raise ConfigError(f"{key} must not be empty")
    return tuple(out)


def _as_float_list(value, key: str) -> tuple[float, ...]:
    items = value if isinstance(value, list) else [value]
    out = []
    for item in items:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"{key} must be a number or list of numbers")
        out.append(float(item))
    if not out:
        raise ConfigError(f"{key} must not be empty")
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    n: tuple[int, ...]
    families: tuple[Family, ...]
    budget_bits: int
    trials: int
    base_seed: int
    m: int | None = None
    d: int | None = None
    d_rule: str | None = None
    sigma: tuple[float, ...] = (0.0,)
    r: float = 4.0
    tau: float = 0.1
    t: float = 1.0
    epsilon: float | None = None

    def __post_init__(self) -> None:
        if self.experiment_id not in EXPERIMENT_IDS:
            raise ConfigError(
                f"experiment_id must be one of {EXPERIMENT_IDS}, got {self.experiment_id!r}"
            )
        if any(n < 1 for n in self.n):
            raise ConfigError("n values must be >= 1")
        if self.m is not None and self.m < 1:
            raise ConfigError("m must be >= 1 when given")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.budget_bits < 1:
            raise ConfigError("budget_bits must be >= 1")
        if not 0 < self.tau <= 1:
            raise ConfigError(f"tau must be in (0, 1], got {self.tau}")
        if self.t < 0:
            raise ConfigError(f"t must be >= 0, got {self.t}")
        if (self.d is None) == (self.d_rule is None) and self.experiment_id != "LEMMAS":
            raise ConfigError("exactly one of d and d_rule is required")
        if self.d_rule is not None and self.d_rule not in D_RULES:
            raise ConfigError(f"d_rule must be one of {D_RULES}, got {self.d_rule!r}")
        if self.d_rule == "D_EQ_8R_KAPPA_M" and not self.r > 1:
            raise ConfigError("r must be > 1 under D_EQ_8R_KAPPA_M")
        if any(s < 0 for s in self.sigma):
            raise ConfigError("sigma values must be >= 0")
        if self.experiment_id == "STABILITY" and any(s <= 0 for s in self.sigma):
            raise ConfigError("STABILITY requires sigma > 0")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(raw) - _KNOWN_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        missing = [k for k in ("experiment_id", "trials", "base_seed") if k not in raw]
        if raw.get("experiment_id") != "LEMMAS":
            missing += [
                k for k in ("n", "families", "budget_bits") if k not in raw
            ]
        if missing:
            raise ConfigError(f"missing config keys: {', '.join(missing)}")
        try:
            families = tuple(Family[name] for name in raw.get("families", ["CONSTANT"]))
        except KeyError as exc:
            raise ConfigError(f"unknown generator family {exc.args[0]!r}") from None
        return cls(
            experiment_id=raw["experiment_id"],
            n=_as_int_list(raw.get("n", 32), "n"),
            families=families,
            budget_bits=int(raw.get("budget_bits", 23)),
            trials=int(raw["trials"]),
            base_seed=int(raw["base_seed"]),
            m=raw.get("m"),
            d=raw.get("d"),
            d_rule=raw.get("d_rule"),
            sigma=_as_float_list(raw.get("sigma", 0.0), "sigma"),
            r=float(raw.get("r", 4.0)),
            tau=float(raw.get("tau", 0.1)),
            t=float(raw.get("t", 1.0)),
            epsilon=None if raw.get("epsilon") is None else float(raw["epsilon"]),
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(raw)

    def resolve_m(self, n: int) -> int:
        """Configured m, or ceil(ln n) (natural log), floored at 1."""
        if self.m is not None:
            return self.m
        return max(1, math.ceil(math.log(n)))

    def epsilon_for(self, n: int, m: int) -> float:
        """l2 success radius: max(0.1, sqrt(n) * 2^(-m+1)) unless overridden."""
        if self.epsilon is not None:
            return self.epsilon
        return max(0.1, math.sqrt(n) * 2.0 ** (-m + 1))

    def to_dict(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "n": list(self.n),
            "m": self.m,
            "m_rule": "explicit" if self.m is not None else "ceil_ln_n",
            "d": self.d,
            "d_rule": self.d_rule,
            "families": [f.name for f in self.families],
            "budget_bits": self.budget_bits,
            "sigma": list(self.sigma),
            "r": self.r,
            "trials": self.trials,
            "base_seed": self.base_seed,
            "tau": self.tau,
            "t": self.t,
            "epsilon": self.epsilon,
        }
