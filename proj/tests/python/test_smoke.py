import math

import numpy as np
import pytest

import abpsim


def test_steering_vector_matches_numpy():
    mu, n = 0.7, 12
    expected = np.exp(1j * mu * np.arange(n)) / math.sqrt(n)
    np.testing.assert_allclose(abpsim.steering_vector(mu, n), expected, atol=1e-14)


def test_beam_gain_against_inner_product():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a, b = rng.uniform(-math.pi, math.pi, 2)
        va, vb = abpsim.steering_vector(a, 16), abpsim.steering_vector(b, 16)
        assert abpsim.beam_gain(a, b, 16) == pytest.approx(abs(np.vdot(va, vb)) ** 2, abs=1e-12)


def test_angle_round_trip():
    for theta in np.linspace(-1.5, 1.5, 31):
        mu = abpsim.angle_to_spatial_freq(theta)
        assert abpsim.spatial_freq_to_angle(mu) == pytest.approx(theta, abs=1e-12)


def test_ratio_inversion_round_trip():
    delta = abpsim.default_offset(16)
    for mu in np.linspace(-0.99 * delta, 0.99 * delta, 21):
        z = abpsim.ratio_metric(mu, 0.0, delta)
        assert -1.0 <= z <= 1.0
        assert abpsim.invert_ratio(z, 0.0, delta) == pytest.approx(mu, abs=1e-10)


def test_beam_grid_spacing():
    freqs = abpsim.beam_freqs(-math.pi, math.pi, abpsim.exact_offset(8), 8)
    steps = np.diff(freqs)
    np.testing.assert_allclose(steps, 2 * math.pi / 8, atol=1e-12)


def test_noiseless_estimate_is_exact_on_exact_grid():
    aod, aoa = 0.3, -0.2
    est = abpsim.estimate_single_path(aod, aoa, 16, 16, offset_rule="exact")
    assert est["aod"] == pytest.approx(aod, abs=1e-9)
    assert est["aoa"] == pytest.approx(aoa, abs=1e-9)
    assert est["trace"]


def test_bad_inputs_raise():
    with pytest.raises(ValueError):
        abpsim.default_config("no-such-experiment")
    with pytest.raises(ValueError):
        abpsim.run_experiment("single-path-mse", trials=0)


def test_codebooks():
    assert abpsim.uniform_codebook(-1.0, 1.0, 1) == pytest.approx([-0.5, 0.5])
    rng = np.random.default_rng(0)
    cw = abpsim.train_ratio_codebook(list(rng.uniform(-1, 1, 2000)), 2)
    assert len(cw) == 4 and cw == sorted(cw)


def test_small_experiment_runs_and_is_deterministic():
    cfg = {"arrays": [[8, 8]], "snr_db": [0.0, 20.0], "trials": 200, "seed": 5}
    rows = abpsim.run_experiment("single-path-mse", cfg)
    again = abpsim.run_experiment("single-path-mse", cfg, threads=1)
    assert rows == again
    low = abpsim.metric(rows, "mse_aod", n_tx=8, snr_db=0)
    high = abpsim.metric(rows, "mse_aod", n_tx=8, snr_db=20)
    assert high < low
    csv = abpsim.run_experiment_csv("single-path-mse", '{"arrays": [[8, 8]], "snr_db": [10.0], "trials": 50}')
    assert len(csv.strip().splitlines()) > 1
