import math

import numpy as np
import pytest
import scipy.linalg

from snrlab.architectures import (
    LensGain,
    run_lai_trial,
    run_lci_trial,
    run_pai_trial,
    simulate_residuals,
)
from snrlab.errors import DomainError, SizeError
from snrlab.harness import SweepConfig, simulate_cell
from snrlab.noise_model import NoiseParams, SeedSpec
from snrlab.scene import SceneVector, flat_scene, random_uniform_scene
from snrlab.walsh_hadamard import SensingOperator

QUIET = NoiseParams(sigma=0.0, rho=0.0, shot_enabled=False)


def test_lens_gain():
    assert LensGain.from_areas(2.0, 50.0).g == 25.0
    with pytest.raises(DomainError):
        LensGain(0.0)
    with pytest.raises(DomainError):
        LensGain.from_areas(0.0, 1.0)


def test_lci_noiseless_roundtrip():
    r = run_lci_trial(SceneVector([2.0, 1.0]), SensingOperator(2), QUIET, np.random.default_rng(0))
    assert r.reconstructed.tolist() == [2.0, 1.0]
    assert r.residual_power == 0.0
    x = random_uniform_scene(4096, 10**7, np.random.default_rng(1))
    r = run_lci_trial(x, SensingOperator(4096), QUIET, np.random.default_rng(0))
    np.testing.assert_allclose(r.reconstructed, x.pixels, rtol=1e-9, atol=1e-9 * x.pixels.max())
    assert r.residual_power < 1e-6


def test_lci_size_mismatch():
    with pytest.raises(SizeError):
        run_lci_trial(flat_scene(8, 8), SensingOperator(4), QUIET, np.random.default_rng(0))


def test_trial_result_consistency():
    r = run_lci_trial(flat_scene(64, 1e6), SensingOperator(64), NoiseParams(), SeedSpec(1, "lci", 64, 0))
    assert r.residual_power >= 0
    assert r.residual_power == pytest.approx(r.recomputed_residual(), rel=1e-12)
    assert r.signal_power == pytest.approx(1e6)


def brute_force_lci_variance(x, sigma):
    # covariance of inv(A) z with diag(y + sigma^2) noise, from a dense scipy inverse
    n = len(x)
    a = (scipy.linalg.hadamard(n) + 1) / 2
    b = scipy.linalg.inv(a)
    cov = b @ np.diag(a @ x + sigma**2) @ b.T
    return np.diag(cov)


@pytest.mark.parametrize("n", [2, 16, 256])
def test_lci_mc_matches_variance_propagation(n):
    cfg = SweepConfig(arch=("lci",), trials=2000, scene="flat", x0=1e7, sigma=5.0, seed=11)
    res, _ = simulate_cell(cfg, "lci", n)
    expected = brute_force_lci_variance(np.full(n, 1e7 / n), 5.0).sum()
    assert abs(res.mean() / expected - 1) < 0.05


def test_lci_unbiased():
    n, T = 16, 10_000
    x = random_uniform_scene(n, 10**5, np.random.default_rng(3))
    op = SensingOperator(n)
    seeds = [SeedSpec(5, "lci", n, t) for t in range(T)]
    rngs = [s.generator() for s in seeds]
    from snrlab.architectures import lci_batch

    recon, _ = lci_batch(np.tile(x.pixels, (T, 1)), op, NoiseParams(sigma=5.0), rngs)
    var = brute_force_lci_variance(x.pixels, 5.0)
    assert np.all(np.abs(recon.mean(axis=0) - x.pixels) <= 5 * np.sqrt(var / T))


def test_pai_examples():
    r = run_pai_trial(flat_scene(16, 100), QUIET, np.random.default_rng(0))
    assert r.residual_power == 0.0
    n, T = 64, 10_000
    cfg = SweepConfig(trials=T, x0=0, scene="flat", rho=5.0, seed=2)
    res, sig = simulate_cell(cfg, "pai", n)
    assert sig == 0.0
    assert abs(res.mean() / (n * 25) - 1) < 0.05
    cfg = SweepConfig(trials=T, x0=10**6, scene="uniform", rho=5.0, seed=3)
    res, sig = simulate_cell(cfg, "pai", n)
    assert sig == 10**6
    assert abs(res.mean() / (10**6 + n * 25) - 1) < 0.05


def test_pai_unbiased():
    n, T = 32, 10_000
    cfg = SweepConfig(trials=T, x0=10**5, scene="flat", rho=5.0, seed=4)
    x = flat_scene(n, 10**5).pixels
    from snrlab.architectures import pixel_batch

    rngs = [SeedSpec(4, "pai", n, t).generator() for t in range(T)]
    out, _ = pixel_batch(np.tile(x, (T, 1)), cfg.noise, rngs)
    assert np.all(np.abs(out.mean(axis=0) - x) <= 5 * np.sqrt((x + 25) / T))


def test_lai_equals_pai_at_unit_gain():
    scene = random_uniform_scene(128, 10**6, np.random.default_rng(9))
    for t in range(5):
        spec = SeedSpec(3, "pai", 128, t)
        a = run_pai_trial(scene, NoiseParams(), spec)
        b = run_lai_trial(scene, LensGain(1.0), NoiseParams(), spec)
        assert np.array_equal(a.reconstructed, b.reconstructed)
        assert a.residual_power == b.residual_power


def test_lai_gain_does_not_amplify_additive_noise():
    cfg = SweepConfig(trials=10_000, x0=0, scene="flat", rho=5.0, gain=100.0, seed=6)
    res, _ = simulate_cell(cfg, "lai", 64)
    assert abs(res.mean() / (64 * 25) - 1) < 0.05


def test_lai_bright_flat_scene():
    cfg = SweepConfig(trials=10_000, x0=1e5, scene="flat", rho=5.0, gain=100.0, seed=7)
    res, sig = simulate_cell(cfg, "lai", 1024)
    assert sig == pytest.approx(1e7)
    assert abs(res.mean() / (1e7 + 1024 * 25) - 1) < 0.05


def test_lai_reference_is_scaled():
    r = run_lai_trial(flat_scene(4, 8), 10.0, QUIET, np.random.default_rng(0))
    assert r.reference.tolist() == [20.0] * 4
    assert r.residual_power == 0.0


@pytest.mark.parametrize("arch", ["lci", "pai", "lai"])
def test_batched_path_matches_single_trials(arch):
    n = 32
    scene = random_uniform_scene(n, 10**6, np.random.default_rng(0))
    seeds = [SeedSpec(8, arch, n, t) for t in range(6)]
    params = NoiseParams(sigma=3.0, rho=4.0)
    batched, _ = simulate_residuals(arch, n, scene, params, seeds, op=SensingOperator(n), gain=7.0)
    for s, expected in zip(seeds, batched):
        if arch == "lci":
            r = run_lci_trial(scene, SensingOperator(n), params, s)
        elif arch == "pai":
            r = run_pai_trial(scene, params, s)
        else:
            r = run_lai_trial(scene, LensGain(7.0), params, s)
        assert r.residual_power == expected


def test_residuals_finite_nonnegative():
    cfg = SweepConfig(trials=50, seed=1)
    for arch in ("lci", "pai", "lai"):
        res, _ = simulate_cell(cfg, arch, 256)
        assert np.all(np.isfinite(res)) and np.all(res >= 0)
        assert not math.isnan(res.sum())
