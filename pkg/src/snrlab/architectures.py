"""One-trial pipelines for the three imaging architectures.

lci  measure with the 0/1 Hadamard operator, add noise to each measurement,
     reconstruct with the exact inverse
pai  noise on each pixel directly
lai  pai with every pixel brightened by the lens gain ``g``

The batched helpers at the bottom are what the sweep uses; the single-trial
functions run through the same code with a batch of one, so both give
bit-identical numbers for the same stream.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SizeError
from .noise_model import ADDITIVE_LCI, ADDITIVE_PIXEL, NoiseParams, SeedSpec, contaminate
from .scene import SceneVector
from .walsh_hadamard import SensingOperator, apply_inverse, apply_sensing

ARCHITECTURES = ("lci", "pai", "lai")


@dataclass(frozen=True)
class LensGain:
    g: float

    def __post_init__(self):
        if not (math.isfinite(self.g) and self.g > 0):
            raise DomainError(f"lens gain must be finite and > 0, got {self.g}")

    @classmethod
    def from_areas(cls, sensor_area: float, lens_area: float) -> LensGain:
        if sensor_area <= 0 or lens_area <= 0:
            raise DomainError("sensor and lens areas must be positive")
        return cls(lens_area / sensor_area)


@dataclass(frozen=True)
class TrialResult:
    arch: str
    n: int
    reconstructed: np.ndarray
    reference: np.ndarray
    residual_power: float

    @property
    def signal_power(self) -> float:
        return float(self.reference.sum())

    def recomputed_residual(self) -> float:
        return float(residual_powers(self.reconstructed[None, :], self.reference[None, :])[0])


def residual_powers(recon: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Row-wise ``sum((recon - ref)**2)`` for 2-D stacks."""
    d = recon - ref
    return (d * d).sum(axis=1)


def _rng(stream) -> np.random.Generator:
    return stream.generator() if isinstance(stream, SeedSpec) else stream


def _pixels(scene) -> np.ndarray:
    if isinstance(scene, SceneVector):
        return scene.pixels
    return SceneVector(scene).pixels


def lci_batch(x: np.ndarray, op: SensingOperator, params: NoiseParams, rngs: Sequence):
    if x.shape[-1] != op.size:
        raise SizeError(f"scene length {x.shape[-1]} != operator size {op.size}")
    y = apply_sensing(op, x)
    z = np.empty_like(y)
    for i, rng in enumerate(rngs):
        z[i] = contaminate(y[i], params, ADDITIVE_LCI, rng)
    return apply_inverse(op, z), x


def pixel_batch(x: np.ndarray, params: NoiseParams, rngs: Sequence, g: float = 1.0):
    ref = x * g if g != 1.0 else x
    out = np.empty_like(ref)
    for i, rng in enumerate(rngs):
        out[i] = contaminate(ref[i], params, ADDITIVE_PIXEL, rng)
    return out, ref


def _single(arch, recon, ref) -> TrialResult:
    return TrialResult(arch, ref.shape[1], recon[0], ref[0], float(residual_powers(recon, ref)[0]))


def run_lci_trial(scene, op: SensingOperator, params: NoiseParams, stream) -> TrialResult:
    x = _pixels(scene)[None, :]
    recon, ref = lci_batch(x, op, params, [_rng(stream)])
    return _single("lci", recon, ref)


def run_pai_trial(scene, params: NoiseParams, stream) -> TrialResult:
    x = _pixels(scene)[None, :]
    recon, ref = pixel_batch(x, params, [_rng(stream)])
    return _single("pai", recon, ref)


def run_lai_trial(scene, gain: LensGain, params: NoiseParams, stream) -> TrialResult:
    if not isinstance(gain, LensGain):
        gain = LensGain(float(gain))
    x = _pixels(scene)[None, :]
    recon, ref = pixel_batch(x, params, [_rng(stream)], gain.g)
    return _single("lai", recon, ref)


SceneSource = SceneVector | Callable[[np.random.Generator], SceneVector]


def simulate_residuals(
    arch: str,
    n: int,
    scene: SceneSource,
    params: NoiseParams,
    seeds: Sequence[SeedSpec],
    op: SensingOperator | None = None,
    gain: float = 1.0,
) -> tuple[np.ndarray, float]:
    """Residual powers for a batch of trials, in seed order.

    ``scene`` is either a fixed scene or a factory drawing a fresh scene from
    each trial's generator before the noise draws. Returns the residual
    powers and the signal power (brightness of the reference, which is the
    same for every trial).
    """
    rngs = [s.generator() for s in seeds]
    if callable(scene):
        x = np.stack([scene(r).pixels for r in rngs])
    else:
        x = np.broadcast_to(_pixels(scene), (len(rngs), n)).copy()
    if x.shape[1] != n:
        raise SizeError(f"scene length {x.shape[1]} != n={n}")
    if arch == "lci":
        recon, ref = lci_batch(x, op if op is not None else SensingOperator(n), params, rngs)
    elif arch == "pai":
        recon, ref = pixel_batch(x, params, rngs)
    elif arch == "lai":
        recon, ref = pixel_batch(x, params, rngs, LensGain(gain).g)
    else:
        raise DomainError(f"unknown architecture {arch!r}")
    return residual_powers(recon, ref), float(ref[0].sum())
