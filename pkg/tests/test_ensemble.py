from __future__ import annotations

import math

import numpy as np
import pytest

from rosmac import (
    SamplePath,
    SimConfig,
    ensemble_moments,
    lyapunov_exponent_proxy,
    moment_series,
    run_ensemble,
    simulate_path,
    stats_from_states,
)
from rosmac.ensemble import _pairwise_sum

from conftest import CYCLE_PARAMS, START


def _constant_path(n, p, samples=5, spacing=0.5, stream_index=0):
    times = np.arange(samples) * spacing
    states = np.tile([float(n), float(p)], (samples, 1))
    return SamplePath(
        times=times, states=states, clamp_events=0, seed=0, stream_index=stream_index
    )


def test_pairwise_sum_agrees_with_flat_sum():
    rng = np.random.default_rng(1)
    for count in (1, 2, 3, 7, 16, 100):
        block = rng.normal(size=(count, 4))
        assert np.abs(_pairwise_sum(block) - block.sum(axis=0)).max() < 1e-12
    ints = np.arange(10, dtype=float).reshape(10, 1)
    assert _pairwise_sum(ints)[0] == 45.0


def test_stats_from_states_two_path_exactness():
    times = np.array([0.0, 1.0])
    states = np.array(
        [
            [[1.0, 2.0], [3.0, 4.0]],
            [[5.0, 6.0], [7.0, 8.0]],
        ]
    )
    stats = stats_from_states(times, states, seed=9, clamp_events_total=3)
    assert np.array_equal(stats.mean_n, [3.0, 5.0])
    assert np.array_equal(stats.mean_p, [4.0, 6.0])
    assert np.array_equal(stats.var_n, [4.0, 4.0])
    assert np.array_equal(stats.var_p, [4.0, 4.0])
    assert np.array_equal(stats.band_lower_n, [2.0, 4.0])
    assert np.array_equal(stats.band_upper_n, [4.0, 6.0])
    assert stats.runs == 2
    assert stats.seed == 9
    assert stats.clamp_events_total == 3
    assert not stats.mean_n.flags.writeable


def test_stats_from_states_validation():
    times = np.array([0.0])
    with pytest.raises(ValueError):
        stats_from_states(times, np.zeros((1, 1, 2)), seed=0)
    with pytest.raises(ValueError):
        stats_from_states(times, np.zeros((3, 1, 3)), seed=0)


def test_band_arrays_recompute_from_mean_and_variance():
    cfg = SimConfig(t_end=5.0, m_steps=500, seed=3)
    stats = run_ensemble(CYCLE_PARAMS, START, cfg, runs=32)
    assert np.array_equal(stats.band_lower_n, stats.mean_n - 0.5 * np.sqrt(stats.var_n))
    assert np.array_equal(stats.band_upper_n, stats.mean_n + 0.5 * np.sqrt(stats.var_n))
    assert np.array_equal(stats.band_lower_p, stats.mean_p - 0.5 * np.sqrt(stats.var_p))
    assert np.array_equal(stats.band_upper_p, stats.mean_p + 0.5 * np.sqrt(stats.var_p))
    assert (stats.var_n >= 0.0).all() and (stats.var_p >= 0.0).all()


def test_zero_noise_ensemble_collapses_to_euler_path():
    # A power-of-two run count keeps the pairwise mean bit-exact, so the
    # variance of identical paths is exactly zero, not merely tiny.
    cfg = SimConfig(t_end=2.0, m_steps=250, seed=5, zero_noise=True)
    stats = run_ensemble(CYCLE_PARAMS, START, cfg, runs=16)
    reference = simulate_path(CYCLE_PARAMS, START, cfg)
    assert np.array_equal(stats.mean_n, reference.states[:, 0])
    assert np.array_equal(stats.mean_p, reference.states[:, 1])
    assert stats.var_n.max() == 0.0
    assert stats.var_p.max() == 0.0
    assert np.array_equal(stats.band_lower_n, stats.band_upper_n)


def test_two_run_ensemble_is_the_average_of_its_streams():
    cfg = SimConfig(t_end=3.0, m_steps=300, seed=11)
    stats = run_ensemble(CYCLE_PARAMS, START, cfg, runs=2)
    path0 = simulate_path(CYCLE_PARAMS, START, cfg, stream_index=0)
    path1 = simulate_path(CYCLE_PARAMS, START, cfg, stream_index=1)
    assert np.array_equal(stats.mean_n, (path0.states[:, 0] + path1.states[:, 0]) / 2)
    assert np.array_equal(stats.mean_p, (path0.states[:, 1] + path1.states[:, 1]) / 2)
    assert stats.clamp_events_total == path0.clamp_events + path1.clamp_events


def test_stride_thins_the_same_ensemble():
    cfg = SimConfig(t_end=2.0, m_steps=400, seed=13)
    full = run_ensemble(CYCLE_PARAMS, START, cfg, runs=8)
    thin = run_ensemble(CYCLE_PARAMS, START, cfg, runs=8, stride=20)
    # Grid times are rebuilt from the strided spacing and may differ by an
    # ulp; the recorded states themselves must agree bit for bit.
    assert np.abs(thin.times - full.times[::20]).max() < 1e-12
    assert np.array_equal(thin.mean_n, full.mean_n[::20])
    assert np.array_equal(thin.var_p, full.var_p[::20])
    with pytest.raises(ValueError):
        run_ensemble(CYCLE_PARAMS, START, cfg, runs=8, stride=7)


def test_worker_count_does_not_change_results():
    # 600 streams at this grid split into three blocks, so the threaded
    # path genuinely interleaves; stream-addressed noise keeps it exact.
    cfg = SimConfig(t_end=1.0, m_steps=500, seed=17)
    serial = run_ensemble(CYCLE_PARAMS, START, cfg, runs=600)
    threaded = run_ensemble(CYCLE_PARAMS, START, cfg, runs=600, workers=4)
    assert np.array_equal(serial.mean_n, threaded.mean_n)
    assert np.array_equal(serial.var_n, threaded.var_n)
    assert np.array_equal(serial.mean_p, threaded.mean_p)
    assert np.array_equal(serial.var_p, threaded.var_p)
    assert serial.clamp_events_total == threaded.clamp_events_total


def test_ensemble_validation():
    cfg = SimConfig(t_end=1.0, m_steps=100, seed=0)
    with pytest.raises(ValueError):
        run_ensemble(CYCLE_PARAMS, START, cfg, runs=1)
    big = SimConfig(t_end=1.0, m_steps=4000, seed=0)
    with pytest.raises(ValueError):
        run_ensemble(CYCLE_PARAMS, START, big, runs=100_000)


def test_noisy_ensemble_records_boundary_hits():
    cfg = SimConfig(t_end=10.0, m_steps=400, seed=1)
    stats = run_ensemble(CYCLE_PARAMS, START, cfg, runs=16)
    assert stats.clamp_events_total > 0
    assert stats.runs == 16
    assert stats.seed == 1


def test_moment_series_constant_path_values():
    path = _constant_path(3.0, 4.0)
    series = moment_series([path], 2.0)
    assert series.p == 2.0
    assert np.array_equal(series.values, np.full(5, 25.0))
    mixed = moment_series([path, _constant_path(0.0, 0.0, stream_index=1)], 2.0)
    assert np.array_equal(mixed.values, np.full(5, 12.5))


def test_moment_series_validation():
    path = _constant_path(1.0, 1.0)
    with pytest.raises(ValueError):
        moment_series([path], 0.0)
    with pytest.raises(ValueError):
        moment_series([], 2.0)
    other = _constant_path(1.0, 1.0, spacing=0.25, stream_index=1)
    with pytest.raises(ValueError):
        moment_series([path, other], 2.0)


def test_lyapunov_proxy_reference_values():
    path = _constant_path(3.0, 4.0, samples=5, spacing=0.5)
    # Rates log(5)/t over t in {1.0, 1.5, 2.0}; the earliest time wins.
    assert lyapunov_exponent_proxy(path) == pytest.approx(math.log(5.0), rel=1e-15)
    dead = _constant_path(0.0, 0.0)
    assert lyapunov_exponent_proxy(dead) == -math.inf
    with pytest.raises(ValueError):
        lyapunov_exponent_proxy(path, t_min=0.0)
    with pytest.raises(ValueError):
        lyapunov_exponent_proxy(path, t_min=3.0)


def test_ensemble_moments_zero_noise_reference():
    cfg = SimConfig(t_end=2.0, m_steps=200, seed=0, zero_noise=True)
    series, proxies = ensemble_moments(CYCLE_PARAMS, START, cfg, runs=4, p_values=(1.0, 2.0))
    reference = simulate_path(CYCLE_PARAMS, START, cfg)
    norms = np.hypot(reference.states[:, 0], reference.states[:, 1])
    assert np.array_equal(series[0].values, norms)
    assert np.array_equal(series[1].values, norms**2)
    mask = reference.times >= 1.0
    expected = (np.log(norms[mask]) / reference.times[mask]).max()
    assert np.array_equal(proxies, np.full(4, expected))


def test_ensemble_moments_validation():
    cfg = SimConfig(t_end=2.0, m_steps=200, seed=0)
    with pytest.raises(ValueError):
        ensemble_moments(CYCLE_PARAMS, START, cfg, runs=4, p_values=(2.0, -1.0))
    with pytest.raises(ValueError):
        ensemble_moments(CYCLE_PARAMS, START, cfg, runs=4, p_values=(2.0,), t_min=5.0)
