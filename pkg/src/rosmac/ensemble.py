"""Monte Carlo ensembles: mean/variance bands, moments, growth-rate proxies.

Estimators follow the plain Monte Carlo forms

    mean(t) = (1/R) sum_j x_j(t)
    var(t)  = (1/R) sum_j (x_j(t) - mean(t))^2      (population divisor R)

with half-width bands mean +/- sqrt(var)/2.  Sums over runs are reduced with
an explicit pairwise tree whose shape depends only on the run count, and path
j always uses noise stream j, so results are bit-identical no matter how the
work is scheduled.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import ModelParams, State
from .sde import SamplePath, SimConfig, _simulate_block

__all__ = [
    "EnsembleStats",
    "MomentSeries",
    "ensemble_moments",
    "lyapunov_exponent_proxy",
    "moment_series",
    "run_ensemble",
    "stats_from_states",
]

# Streams simulated per vectorized block; capped so increment buffers stay
# modest even at fine grids.  Has no effect on results, only on memory.
_BLOCK_TARGET = 20_000_000

# Hard ceiling on recorded floats; past this the caller must thin with a
# stride instead of materializing the ensemble.
_MAX_RECORDED = 600_000_000


@dataclass(frozen=True)
class EnsembleStats:
    """Per-time-point ensemble summaries for both components."""

    times: np.ndarray
    mean_n: np.ndarray
    var_n: np.ndarray
    band_lower_n: np.ndarray
    band_upper_n: np.ndarray
    mean_p: np.ndarray
    var_p: np.ndarray
    band_lower_p: np.ndarray
    band_upper_p: np.ndarray
    runs: int
    seed: int
    clamp_events_total: int = 0

    def __post_init__(self) -> None:
        for name in (
            "times",
            "mean_n",
            "var_n",
            "band_lower_n",
            "band_upper_n",
            "mean_p",
            "var_p",
            "band_lower_p",
            "band_upper_p",
        ):
            getattr(self, name).flags.writeable = False


@dataclass(frozen=True)
class MomentSeries:
    """Estimated E||X_t||^p on a recorded time grid."""

    p: float
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        self.times.flags.writeable = False
        self.values.flags.writeable = False


def _pairwise_sum(values: np.ndarray) -> np.ndarray:
    """Sum over axis 0 with a fixed halving tree (shape-determined order)."""
    acc = values
    while acc.shape[0] > 1:
        count = acc.shape[0]
        paired = count - (count % 2)
        folded = acc[0:paired:2] + acc[1:paired:2]
        if count % 2:
            folded = np.concatenate([folded, acc[-1:]], axis=0)
        acc = folded
    return acc[0]


def _block_ranges(runs: int, m_steps: int) -> list[range]:
    per_block = max(16, min(256, _BLOCK_TARGET // max(1, m_steps)))
    return [range(start, min(start + per_block, runs)) for start in range(0, runs, per_block)]


def _collect_states(
    params: ModelParams,
    x0: State,
    cfg: SimConfig,
    runs: int,
    stride: int,
    workers: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All recorded states, assembled by stream index regardless of schedule."""
    if runs < 2:
        raise ValueError(f"need at least 2 runs, got {runs}")
    if stride < 1 or cfg.m_steps % stride != 0:
        raise ValueError(f"stride must divide m_steps, got stride={stride}, m_steps={cfg.m_steps}")
    recorded = cfg.m_steps // stride + 1
    if runs * recorded * 2 > _MAX_RECORDED:
        raise ValueError(
            f"ensemble would materialize {runs * recorded * 2} floats; "
            "increase the stride to thin the recording"
        )
    states = np.empty((runs, recorded, 2))
    clamps = np.empty(runs, dtype=np.int64)
    blocks = _block_ranges(runs, cfg.m_steps)

    def fill(block: range) -> None:
        block_states, block_clamps = _simulate_block(params, x0, cfg, block, stride)
        states[block.start : block.stop] = block_states
        clamps[block.start : block.stop] = block_clamps

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, blocks))
    else:
        for block in blocks:
            fill(block)
    times = np.arange(recorded) * (cfg.delta * stride)
    return times, states, clamps


def stats_from_states(
    times: np.ndarray, states: np.ndarray, seed: int, clamp_events_total: int = 0
) -> EnsembleStats:
    """Reduce a (runs, times, 2) tensor to ensemble statistics."""
    states = np.asarray(states, dtype=float)
    if states.ndim != 3 or states.shape[2] != 2 or states.shape[0] < 2:
        raise ValueError(f"states must have shape (runs >= 2, times, 2), got {states.shape}")
    runs = states.shape[0]
    series = {}
    for axis, tag in ((0, "n"), (1, "p")):
        component = states[:, :, axis]
        mean = _pairwise_sum(component) / runs
        var = _pairwise_sum((component - mean) ** 2) / runs
        half = 0.5 * np.sqrt(var)
        series[f"mean_{tag}"] = mean
        series[f"var_{tag}"] = var
        series[f"band_lower_{tag}"] = mean - half
        series[f"band_upper_{tag}"] = mean + half
    return EnsembleStats(
        times=np.asarray(times, dtype=float).copy(),
        runs=runs,
        seed=seed,
        clamp_events_total=clamp_events_total,
        **series,
    )


def run_ensemble(
    params: ModelParams,
    x0: State,
    cfg: SimConfig,
    runs: int,
    *,
    stride: int = 1,
    workers: int = 1,
) -> EnsembleStats:
    """Simulate `runs` paths on streams 0..runs-1 and summarize them."""
    times, states, clamps = _collect_states(params, x0, cfg, runs, stride, workers)
    return stats_from_states(times, states, cfg.seed, int(clamps.sum()))


def moment_series(paths: Sequence[SamplePath], p: float) -> MomentSeries:
    """Estimate E||X_t||^p from sample paths sharing one time grid."""
    if not (p > 0.0):
        raise ValueError(f"moment order must be > 0, got {p!r}")
    if len(paths) < 1:
        raise ValueError("need at least one path")
    times = paths[0].times
    for path in paths[1:]:
        if not np.array_equal(path.times, times):
            raise ValueError("paths must share a common time grid")
    norms = np.stack([np.hypot(path.states[:, 0], path.states[:, 1]) for path in paths])
    values = _pairwise_sum(norms**p) / len(paths)
    return MomentSeries(p=float(p), times=times.copy(), values=values)


def lyapunov_exponent_proxy(path: SamplePath, t_min: float = 1.0) -> float:
    """max over recorded t >= t_min of log||X_t|| / t.

    Zero-norm samples contribute -inf (the path died), which can only lower
    the maximum; a path that is dead throughout the window reports -inf.
    """
    if not (t_min > 0.0):
        raise ValueError(f"t_min must be > 0, got {t_min!r}")
    mask = path.times >= t_min
    if not mask.any():
        raise ValueError(f"path ends at t={path.times[-1]} before t_min={t_min}")
    norms = np.hypot(path.states[mask, 0], path.states[mask, 1])
    with np.errstate(divide="ignore"):
        rates = np.log(norms) / path.times[mask]
    return float(rates.max())


def ensemble_moments(
    params: ModelParams,
    x0: State,
    cfg: SimConfig,
    runs: int,
    p_values: Sequence[float],
    *,
    t_min: float = 1.0,
    stride: int = 1,
    workers: int = 1,
) -> tuple[list[MomentSeries], np.ndarray]:
    """Moment series for each order in p_values plus per-path growth proxies.

    One simulation pass serves every requested order; the proxies are the
    per-path max over recorded t >= t_min of log||X_t|| / t.
    """
    for p in p_values:
        if not (p > 0.0):
            raise ValueError(f"moment orders must be > 0, got {p!r}")
    if not (0.0 < t_min < cfg.t_end):
        raise ValueError(f"t_min must lie in (0, t_end), got {t_min!r}")
    times, states, _ = _collect_states(params, x0, cfg, runs, stride, workers)
    norms = np.hypot(states[:, :, 0], states[:, :, 1])
    series = [
        MomentSeries(p=float(p), times=times.copy(), values=_pairwise_sum(norms ** float(p)) / runs)
        for p in p_values
    ]
    mask = times >= t_min
    with np.errstate(divide="ignore"):
        rates = np.log(norms[:, mask]) / times[mask]
    return series, rates.max(axis=1)
