"""Shot and additive noise with counter-derived, schedule-independent streams.

Every trial owns a generator keyed by ``(master_seed, architecture, n, trial)``
through ``numpy.random.SeedSequence`` spawn keys, so the draws of one trial do
not depend on which worker ran it or in what order.

Shot noise uses ``Generator.poisson``, which is exact for all means (inversion
below 10, transformed rejection above). Additive noise is Gaussian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

ARCH_CODES = {"lci": 0, "pai": 1, "lai": 2}

ADDITIVE_LCI = "sigma"
ADDITIVE_PIXEL = "rho"


@dataclass(frozen=True)
class NoiseParams:
    sigma: float = 5.0
    rho: float = 5.0
    shot_enabled: bool = True

    def __post_init__(self):
        for name in ("sigma", "rho"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise DomainError(f"{name} must be finite and >= 0, got {v}")

    def std(self, choice: str) -> float:
        if choice not in (ADDITIVE_LCI, ADDITIVE_PIXEL):
            raise DomainError(f"unknown additive std choice {choice!r}")
        return getattr(self, choice)


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    arch: str
    n: int
    trial: int

    def __post_init__(self):
        if self.arch not in ARCH_CODES:
            raise DomainError(f"unknown architecture {self.arch!r}")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError("master_seed must be an unsigned 64-bit integer")

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            self.master_seed, spawn_key=(ARCH_CODES[self.arch], self.n, self.trial)
        )

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))


def _as_rng(stream) -> np.random.Generator:
    if isinstance(stream, SeedSpec):
        return stream.generator()
    return stream


def sample_shot(mean: float, stream) -> int:
    """One Poisson draw with the given mean."""
    if not (math.isfinite(mean) and mean >= 0):
        raise DomainError(f"Poisson mean must be finite and >= 0, got {mean}")
    return int(_as_rng(stream).poisson(mean))


def sample_additive(std: float, stream) -> float:
    if not (math.isfinite(std) and std >= 0):
        raise DomainError(f"additive std must be finite and >= 0, got {std}")
    return float(_as_rng(stream).normal(0.0, std))


def contaminate(values, params: NoiseParams, std_choice: str, stream) -> np.ndarray:
    """Poisson(values) + N(0, std^2) elementwise, or values + N(0, std^2) without shot.

    Draw order is fixed: all shot samples, then all additive samples.
    """
    rng = _as_rng(stream)
    v = np.asarray(values, dtype=np.float64)
    std = params.std(std_choice)
    if params.shot_enabled:
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DomainError("shot noise needs finite nonnegative values")
        out = rng.poisson(v).astype(np.float64)
    else:
        out = v.copy()
    out += rng.normal(0.0, std, size=v.shape)
    return out
