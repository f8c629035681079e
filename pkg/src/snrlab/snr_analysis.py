"""Empirical SNR, exact variance propagation, and closed-form SNR curves.

SNR is total signal over root total noise power, ``X0 / sqrt(sum var)``.
Decibels are ``10 log10`` of that ratio, so a factor of sqrt(2) is 1.505 dB.

Exact propagation for the lensless pipeline: with ``B = inv(A)`` and
independent measurement noise of variance ``y_i + sigma^2`` (Poisson plus
additive), ``sum_j var(xrec_j) = sum_i (sum_j B_ji^2) (y_i + sigma^2)``.
For the Sylvester 0/1 operator this evaluates to
``(3 - 4/n) X0 + 2 x_1 + (5 - 4/n) sigma^2``, which is larger than the
closed-form prediction ``(2 - 4/n) X0 + (4 - 4/n) sigma^2``. Both are kept:
:func:`snr_lci_theory` reports the closed-form curve, the oracle reports the
exact one, and the harness prints the gap.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .architectures import TrialResult
from .errors import AggregationError, DomainError
from .walsh_hadamard import SensingOperator, apply_sensing, dense_inverse_matrix


def pairwise_sum(values) -> float:
    """Fixed-tree pairwise sum; result depends only on the order of ``values``."""
    v = [float(x) for x in np.asarray(values, dtype=np.float64).ravel()]
    if not v:
        return 0.0
    while len(v) > 1:
        nxt = [v[i] + v[i + 1] for i in range(0, len(v) - 1, 2)]
        if len(v) % 2:
            nxt.append(v[-1])
        v = nxt
    return v[0]


def snr(signal_power: float, noise_power: float) -> float:
    """``signal / sqrt(noise)``; +inf for zero noise, nan for 0/0."""
    if noise_power < 0:
        raise DomainError("noise power must be >= 0")
    if noise_power == 0:
        return math.inf if signal_power > 0 else math.nan
    return signal_power / math.sqrt(noise_power)


def to_db(linear: float) -> float:
    if not linear > 0:
        raise DomainError(f"decibels need a positive ratio, got {linear}")
    return 10.0 * math.log10(linear)


def _db_or_special(linear: float) -> float:
    if math.isnan(linear):
        return math.nan
    if linear == 0:
        return -math.inf
    return to_db(linear)


@dataclass(frozen=True)
class SnrEstimate:
    arch: str
    n: int
    trials: int
    signal_power: float
    noise_power: float
    snr_linear: float
    snr_db: float
    theory_linear: float | None = None
    oracle_linear: float | None = None


def aggregate(arch: str, n: int, signal_power: float, residuals, **extra) -> SnrEstimate:
    res = np.asarray(residuals, dtype=np.float64)
    if res.size < 2:
        raise AggregationError("need at least two trials")
    noise = pairwise_sum(res) / res.size
    lin = snr(signal_power, noise)
    return SnrEstimate(arch, n, int(res.size), signal_power, noise, lin, _db_or_special(lin), **extra)


def empirical_snr(trials: Sequence[TrialResult]) -> SnrEstimate:
    if len(trials) < 2:
        raise AggregationError("need at least two trials")
    arch, n = trials[0].arch, trials[0].n
    if any(t.arch != arch or t.n != n for t in trials):
        raise AggregationError("trials mix architectures or sizes")
    signal = trials[0].signal_power
    return aggregate(arch, n, signal, [t.residual_power for t in trials])


def lci_column_weights(op: SensingOperator) -> np.ndarray:
    """``sum_j inv(A)_ji^2`` for every measurement ``i``, from the dense inverse."""
    b = dense_inverse_matrix(op)
    return (b * b).sum(axis=0)


def lci_variance_oracle(scene, op: SensingOperator, sigma: float, shot_enabled: bool = True) -> float:
    """Exact total reconstruction variance by propagation through dense ``inv(A)``."""
    if sigma < 0:
        raise DomainError("sigma must be >= 0")
    x = np.asarray(getattr(scene, "pixels", scene), dtype=np.float64)
    w = lci_column_weights(op)
    y = apply_sensing(op, x) if shot_enabled else np.zeros_like(x)
    return float(np.dot(w, y + sigma * sigma))


def pixel_variance_oracle(scene, rho: float, g: float = 1.0, shot_enabled: bool = True) -> float:
    """Total variance of directly sensed pixels: ``sum(g x_i) + n rho^2``."""
    x = np.asarray(getattr(scene, "pixels", scene), dtype=np.float64)
    shot = g * float(x.sum()) if shot_enabled else 0.0
    return shot + x.size * rho * rho


def snr_lci_theory(x0: float, sigma: float, n: int) -> float:
    """Closed-form lensless SNR, ``X0 / sqrt((2 - 4/n) X0 + (4 - 4/n) sigma^2)``."""
    if n < 2:
        raise DomainError("lensless SNR formula needs n >= 2")
    if x0 <= 0:
        raise DomainError("x0 must be > 0")
    denom = (2.0 - 4.0 / n) * x0 + (4.0 - 4.0 / n) * sigma * sigma
    return snr(x0, denom)


def snr_lci_bound(x0: float, sigma: float) -> float:
    """Resolution-free lower bound ``X0 / sqrt(2 X0 + 4 sigma^2)``."""
    if x0 <= 0:
        raise DomainError("x0 must be > 0")
    return x0 / math.sqrt(2.0 * x0 + 4.0 * sigma * sigma)


def snr_pai_theory(x0: float, rho: float, n: int) -> float:
    if x0 < 0:
        raise DomainError("x0 must be >= 0")
    denom = x0 + n * rho * rho
    if denom <= 0:
        raise DomainError("x0 + n rho^2 must be > 0")
    return x0 / math.sqrt(denom)


def snr_lai_theory(x0: float, rho: float, n: int, g: float) -> float:
    if not g > 0:
        raise DomainError("lens gain must be > 0")
    return snr_pai_theory(g * x0, rho, n)


def ratio_lci_pai(x0: float, sigma: float, rho: float, n: int) -> float:
    """``sqrt(X0 + n rho^2) / sqrt(2 X0 + 4 sigma^2)``, no small-sigma shortcut."""
    return ratio_lci_lai(x0, sigma, rho, n, 1.0)


def ratio_lci_lai(x0: float, sigma: float, rho: float, n: int, g: float) -> float:
    """``sqrt(g X0 + n rho^2) / (g sqrt(2 X0 + 4 sigma^2))``."""
    if not g > 0:
        raise DomainError("lens gain must be > 0")
    if x0 < 0 or n < 1:
        raise DomainError("need x0 >= 0 and n >= 1")
    lo = 2.0 * x0 + 4.0 * sigma * sigma
    if lo <= 0:
        raise DomainError("2 x0 + 4 sigma^2 must be > 0")
    return math.sqrt(g * x0 + n * rho * rho) / (g * math.sqrt(lo))


def pai_lci_crossover(x0: float, sigma: float, rho: float, max_log2n: int = 24) -> int | None:
    """Smallest dyadic n with the pinhole SNR curve under the lensless bound."""
    bound = snr_lci_bound(x0, sigma)
    for k in range(1, max_log2n + 1):
        if snr_pai_theory(x0, rho, 2**k) < bound:
            return 2**k
    return None
