"""Resolution sweeps: Monte-Carlo cells, closed-form tables and oracle audits."""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .architectures import ARCHITECTURES, simulate_residuals
from .errors import CapacityError, SnrlabIOError, UsageError
from .noise_model import NoiseParams, SeedSpec
from .scene import SceneVector, flat_scene, random_uniform_scene, scene_from_image
from .snr_analysis import (
    SnrEstimate,
    aggregate,
    lci_variance_oracle,
    pai_lci_crossover,
    pixel_variance_oracle,
    ratio_lci_lai,
    ratio_lci_pai,
    snr,
    snr_lai_theory,
    snr_lci_bound,
    snr_lci_theory,
    snr_pai_theory,
    to_db,
)
from .walsh_hadamard import DENSE_LIMIT, SensingOperator

log = logging.getLogger(__name__)

MAX_LOG2N = 24
# float64 elements per trial batch; batching depends on n only, never on workers
BATCH_ELEMENTS = 2**21
_PERMUTATION_STREAM = 99

CSV_HEADER = (
    "arch,n,trials,signal_power,noise_power,snr_linear,snr_db,"
    "theory_linear,theory_db,oracle_linear,bound_linear,seed"
)


@dataclass
class SweepConfig:
    arch: tuple[str, ...] = ARCHITECTURES
    log2n_min: int = 4
    log2n_max: int = 16
    trials: int = 100
    x0: float = 1e7
    sigma: float = 5.0
    rho: float = 5.0
    gain: float = 100.0
    scene: str = "uniform"
    seed: int = 2014
    permute: bool = False
    shot: bool = True
    out: str | None = None
    workers: int = 1
    dense_limit: int = DENSE_LIMIT

    def __post_init__(self):
        if isinstance(self.arch, str):
            self.arch = tuple(a.strip() for a in self.arch.split(",") if a.strip())
        self.arch = tuple(self.arch)

    def validate(self) -> SweepConfig:
        bad = [a for a in self.arch if a not in ARCHITECTURES]
        if not self.arch or bad:
            raise UsageError(f"architectures must be a subset of {ARCHITECTURES}, got {self.arch}")
        if len(set(self.arch)) != len(self.arch):
            raise UsageError("duplicate architecture")
        if not 1 <= self.log2n_min <= self.log2n_max:
            raise UsageError("need 1 <= log2n_min <= log2n_max")
        if self.log2n_max > MAX_LOG2N:
            raise CapacityError(f"log2n_max {self.log2n_max} exceeds capacity {MAX_LOG2N}")
        if self.trials < 2:
            raise UsageError("trials must be >= 2")
        if not (math.isfinite(self.x0) and self.x0 >= 0):
            raise UsageError("x0 must be finite and >= 0")
        if self.scene == "uniform" and self.x0 != int(self.x0):
            raise UsageError("uniform-random scenes need an integer x0")
        if not (self.sigma >= 0 and self.rho >= 0):
            raise UsageError("sigma and rho must be >= 0")
        if not (math.isfinite(self.gain) and self.gain > 0):
            raise UsageError("gain must be > 0")
        if self.scene not in ("uniform", "flat") and not self.scene.startswith("image:"):
            raise UsageError(f"scene must be uniform, flat or image:PATH, got {self.scene!r}")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise UsageError("workers must be >= 1")
        return self

    @property
    def noise(self) -> NoiseParams:
        return NoiseParams(self.sigma, self.rho, self.shot)

    @property
    def sizes(self) -> list[int]:
        return [2**k for k in range(self.log2n_min, self.log2n_max + 1)]

    @classmethod
    def from_json(cls, path, **overrides) -> SweepConfig:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SnrlabIOError(f"cannot load config {path}: {exc}") from exc
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)


def sensing_operator(cfg: SweepConfig, n: int) -> SensingOperator:
    if not cfg.permute:
        return SensingOperator(n)
    ss = np.random.SeedSequence(cfg.seed, spawn_key=(_PERMUTATION_STREAM, n))
    return SensingOperator.random(n, np.random.default_rng(ss))


def scene_source(cfg: SweepConfig, n: int):
    """Fixed scene, or a per-trial factory for uniform-random scenes."""
    if cfg.scene == "uniform":
        x0 = int(cfg.x0)
        return lambda rng: random_uniform_scene(n, x0, rng)
    if cfg.scene == "flat":
        return flat_scene(n, cfg.x0)
    return scene_from_image(cfg.scene[len("image:"):], n, cfg.x0)


def expected_scene(cfg: SweepConfig, n: int, source) -> SceneVector:
    # total variance is linear in the scene, so the oracle of the mean scene is exact
    return flat_scene(n, cfg.x0) if callable(source) else source


def theory_value(cfg: SweepConfig, arch: str, n: int) -> float | None:
    try:
        if arch == "lci":
            return snr_lci_theory(cfg.x0, cfg.sigma, n)
        if arch == "pai":
            return snr_pai_theory(cfg.x0, cfg.rho, n)
        return snr_lai_theory(cfg.x0, cfg.rho, n, cfg.gain)
    except UsageError:
        return None


def bound_value(cfg: SweepConfig, arch: str) -> float | None:
    if arch != "lci" or cfg.x0 <= 0:
        return None
    return snr_lci_bound(cfg.x0, cfg.sigma)


def oracle_variance(cfg: SweepConfig, arch: str, n: int, scene: SceneVector) -> float:
    if arch == "lci":
        return lci_variance_oracle(scene, sensing_operator(cfg, n), cfg.sigma, cfg.shot)
    g = cfg.gain if arch == "lai" else 1.0
    return pixel_variance_oracle(scene, cfg.rho, g, cfg.shot)


def simulate_cell(cfg: SweepConfig, arch: str, n: int, source=None, stream_arch: str | None = None):
    """Residual powers of all trials in one (arch, n) cell, in trial order."""
    if source is None:
        source = scene_source(cfg, n)
    op = sensing_operator(cfg, n) if arch == "lci" else None
    label = stream_arch or arch
    batch = max(1, min(cfg.trials, BATCH_ELEMENTS // n))
    parts = []
    signal = 0.0
    for start in range(0, cfg.trials, batch):
        seeds = [SeedSpec(cfg.seed, label, n, t) for t in range(start, min(cfg.trials, start + batch))]
        res, signal = simulate_residuals(arch, n, source, cfg.noise, seeds, op=op, gain=cfg.gain)
        parts.append(res)
    return np.concatenate(parts), signal


def _run_cell(cfg: SweepConfig, arch: str, n: int) -> SnrEstimate:
    source = scene_source(cfg, n)
    residuals, signal = simulate_cell(cfg, arch, n, source)
    oracle = None
    if n <= cfg.dense_limit:
        scene = expected_scene(cfg, n, source)
        g = cfg.gain if arch == "lai" else 1.0
        oracle = snr(g * scene.brightness, oracle_variance(cfg, arch, n, scene))
    est = aggregate(arch, n, signal, residuals, theory_linear=theory_value(cfg, arch, n), oracle_linear=oracle)
    log.info("%s n=%d snr=%.6g dB=%.4f", arch, n, est.snr_linear, est.snr_db)
    return est


def _precheck(cfg: SweepConfig) -> None:
    cfg.validate()
    if cfg.scene.startswith("image:"):
        for n in cfg.sizes:
            scene_from_image(cfg.scene[len("image:"):], n, cfg.x0)


def run_sweep(cfg: SweepConfig) -> list[SnrEstimate]:
    """One SnrEstimate per (arch, n), rows sorted by (arch, n)."""
    _precheck(cfg)
    cells = sorted((a, n) for a in cfg.arch for n in cfg.sizes)
    if cfg.workers == 1:
        return [_run_cell(cfg, a, n) for a, n in cells]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda c: _run_cell(cfg, *c), cells))


@dataclass(frozen=True)
class TheoryRow:
    n: int
    lci_theory: float | None
    lci_bound: float | None
    pai_theory: float | None
    lai_theory: float | None
    ratio_lci_pai: float | None
    ratio_lci_lai: float | None


def _guard(fn, *args):
    try:
        return fn(*args)
    except UsageError:
        return None


def run_theory(cfg: SweepConfig) -> list[TheoryRow]:
    cfg.validate()
    rows = []
    for n in cfg.sizes:
        rows.append(
            TheoryRow(
                n,
                theory_value(cfg, "lci", n),
                bound_value(cfg, "lci"),
                theory_value(cfg, "pai", n),
                theory_value(cfg, "lai", n),
                _guard(ratio_lci_pai, cfg.x0, cfg.sigma, cfg.rho, n),
                _guard(ratio_lci_lai, cfg.x0, cfg.sigma, cfg.rho, n, cfg.gain),
            )
        )
    return rows


def crossover(cfg: SweepConfig) -> int | None:
    if cfg.x0 <= 0:
        return None
    return pai_lci_crossover(cfg.x0, cfg.sigma, cfg.rho, MAX_LOG2N)


@dataclass(frozen=True)
class OracleRow:
    n: int
    trials: int
    signal_power: float
    oracle_variance: float
    theory_linear: float | None
    oracle_linear: float
    mc_linear: float
    gaps: dict = field(default_factory=dict)


def _gap(a, b):
    if a is None or b is None or not math.isfinite(b) or b == 0:
        return None
    return abs(a - b) / b


def run_oracle(cfg: SweepConfig) -> list[OracleRow]:
    """Closed form vs exact propagation vs Monte Carlo for the lensless pipeline."""
    cfg.validate()
    if 2**cfg.log2n_max > cfg.dense_limit:
        raise CapacityError(f"oracle mode needs n <= {cfg.dense_limit}")
    if cfg.scene.startswith("image:"):
        _precheck(cfg)

    def one(n):
        source = scene_source(cfg, n)
        scene = expected_scene(cfg, n, source)
        var = oracle_variance(cfg, "lci", n, scene)
        residuals, signal = simulate_cell(cfg, "lci", n, source)
        mc = aggregate("lci", n, signal, residuals).snr_linear
        theory = theory_value(cfg, "lci", n)
        orc = snr(scene.brightness, var)
        gaps = {
            "theory_oracle": _gap(theory, orc),
            "mc_oracle": _gap(mc, orc),
            "theory_mc": _gap(theory, mc),
        }
        return OracleRow(n, cfg.trials, scene.brightness, var, theory, orc, mc, gaps)

    if cfg.workers == 1:
        return [one(n) for n in cfg.sizes]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(one, cfg.sizes))


def fmt(v) -> str:
    """Shortest round-trip decimal; empty for missing, ``inf``/``-inf``/``nan`` spelled out."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def sweep_csv(rows: list[SnrEstimate], cfg: SweepConfig) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        theory_db = to_db(r.theory_linear) if r.theory_linear and r.theory_linear > 0 else None
        vals = (
            r.n, r.trials, r.signal_power, r.noise_power, r.snr_linear, r.snr_db,
            r.theory_linear, theory_db, r.oracle_linear, bound_value(cfg, r.arch), cfg.seed,
        )
        lines.append(",".join([r.arch] + [fmt(v) for v in vals]))
    return "\n".join(lines) + "\n"


THEORY_HEADER = "n,lci_theory,lci_bound,pai_theory,lai_theory,ratio_lci_pai,ratio_lci_lai,lci_theory_db,pai_theory_db,lai_theory_db"


def theory_csv(rows: list[TheoryRow]) -> str:
    def db(v):
        return to_db(v) if v is not None and v > 0 else None

    lines = [THEORY_HEADER]
    for r in rows:
        vals = (r.n, r.lci_theory, r.lci_bound, r.pai_theory, r.lai_theory, r.ratio_lci_pai,
                r.ratio_lci_lai, db(r.lci_theory), db(r.pai_theory), db(r.lai_theory))
        lines.append(",".join(fmt(v) for v in vals))
    return "\n".join(lines) + "\n"


ORACLE_HEADER = "n,trials,signal_power,oracle_variance,theory_linear,oracle_linear,mc_linear,gap_theory_oracle,gap_mc_oracle,gap_theory_mc"


def oracle_csv(rows: list[OracleRow]) -> str:
    lines = [ORACLE_HEADER]
    for r in rows:
        vals = (r.n, r.trials, r.signal_power, r.oracle_variance, r.theory_linear, r.oracle_linear,
                r.mc_linear, r.gaps["theory_oracle"], r.gaps["mc_oracle"], r.gaps["theory_mc"])
        lines.append(",".join(fmt(v) for v in vals))
    return "\n".join(lines) + "\n"


def write_text(text: str, path) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        parent = os.path.dirname(os.path.abspath(path))
        os.makedirs(parent, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise SnrlabIOError(f"cannot write {path}: {exc}") from exc
