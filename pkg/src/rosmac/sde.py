"""Euler-Maruyama simulation of the demographic-noise system.

Discretization on the equidistant grid tau_i = i * delta, delta = t_end / m:

    Y_{i+1} = Y_i + mu(Y_i) delta + g(Y_i) dW_i,   dW_i ~ N(0, delta I)

Negative components produced by a step are projected back to zero; each
projection is counted so the caller can judge how often the boundary bites.

Reproducibility contract: the Brownian increments for a path are a pure
function of (seed, stream_index) through a counter-based generator, so any
path can be regenerated in isolation and ensembles are schedule-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .model import ModelParams, State, _diffusion_variances, _drift_terms

__all__ = [
    "DESK_STEPS",
    "FINE_STEPS",
    "NoiseStream",
    "SamplePath",
    "SimConfig",
    "em_step",
    "simulate_path",
    "strong_self_convergence",
]

# Step-count presets at t_end = 10: the fine grid (dt = 2.5e-4) is the
# archival resolution; the desk grid keeps interactive work and tests quick.
FINE_STEPS = 40_000
DESK_STEPS = 4_000

_MAX_SEED = 2**64


@dataclass(frozen=True)
class SimConfig:
    """Simulation window, grid, and noise policy for one or many paths."""

    t_end: float
    m_steps: int = DESK_STEPS
    seed: int = 0
    clamp_policy: str = "project-to-zero"
    zero_noise: bool = False

    def __post_init__(self) -> None:
        if not (self.t_end > 0.0) or not math.isfinite(self.t_end):
            raise ValueError(f"t_end must be finite and > 0, got {self.t_end!r}")
        if self.m_steps < 1:
            raise ValueError(f"m_steps must be >= 1, got {self.m_steps!r}")
        if not (0 <= self.seed < _MAX_SEED):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.clamp_policy != "project-to-zero":
            raise ValueError(f"unsupported clamp_policy {self.clamp_policy!r}")

    @cached_property
    def delta(self) -> float:
        return self.t_end / self.m_steps


@dataclass(frozen=True)
class SamplePath:
    """One realized path on the grid times[i] = i * delta."""

    times: np.ndarray
    states: np.ndarray
    clamp_events: int
    seed: int
    stream_index: int

    def __post_init__(self) -> None:
        self.times.flags.writeable = False
        self.states.flags.writeable = False

    def __len__(self) -> int:
        return len(self.times)


class NoiseStream:
    """Brownian increments addressed by (seed, stream_index).

    Backed by Philox keyed with the pair, so streams with different indices
    are statistically independent and each stream's increment sequence is a
    fixed function of its address: asking for more steps extends the
    sequence without disturbing the prefix.
    """

    def __init__(self, seed: int, stream_index: int):
        if not (0 <= seed < _MAX_SEED):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
        if not (0 <= stream_index < _MAX_SEED):
            raise ValueError(f"stream_index must be a 64-bit unsigned integer, got {stream_index!r}")
        self.seed = seed
        self.stream_index = stream_index

    def _generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream_index], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def increments(self, m_steps: int, delta: float) -> np.ndarray:
        """(m_steps, 2) array of N(0, delta) increments, one pair per step."""
        if m_steps < 1:
            raise ValueError(f"m_steps must be >= 1, got {m_steps!r}")
        if not (delta > 0.0):
            raise ValueError(f"delta must be > 0, got {delta!r}")
        draws = self._generator().standard_normal((m_steps, 2))
        return draws * math.sqrt(delta)


def _em_update(m, c, k, n, p, delta, dw1, dw2):
    """One Euler-Maruyama step before clamping; floats or arrays."""
    dn, dp = _drift_terms(m, c, k, n, p)
    v1, v2 = _diffusion_variances(m, c, k, n, p)
    return (
        n + dn * delta + np.sqrt(v1) * dw1,
        p + dp * delta + np.sqrt(v2) * dw2,
    )


def em_step(
    params: ModelParams, x: State, delta: float, dw1: float, dw2: float
) -> tuple[State, bool]:
    """Advance one step from x; returns the new state and a clamp flag."""
    n, p = x
    if n < 0.0 or p < 0.0:
        raise ValueError(f"state must lie in the closed quadrant, got {x!r}")
    if not (delta > 0.0) or not math.isfinite(delta):
        raise ValueError(f"delta must be finite and > 0, got {delta!r}")
    if not (math.isfinite(dw1) and math.isfinite(dw2)):
        raise ValueError(f"increments must be finite, got {(dw1, dw2)!r}")
    n_new, p_new = _em_update(params.m, params.c, params.k, float(n), float(p), delta, dw1, dw2)
    clamped = False
    if n_new < 0.0:
        n_new = 0.0
        clamped = True
    if p_new < 0.0:
        p_new = 0.0
        clamped = True
    return State(float(n_new), float(p_new)), clamped


def simulate_path(
    params: ModelParams, x0: State, cfg: SimConfig, stream_index: int = 0
) -> SamplePath:
    """Simulate one path; deterministic in (params, x0, cfg, stream_index)."""
    n, p = float(x0[0]), float(x0[1])
    if n < 0.0 or p < 0.0:
        raise ValueError(f"x0 must lie in the closed quadrant, got {x0!r}")
    steps = cfg.m_steps
    delta = cfg.delta
    if cfg.zero_noise:
        increments = np.zeros((steps, 2))
    else:
        increments = NoiseStream(cfg.seed, stream_index).increments(steps, delta)
    m, c, k = params.m, params.c, params.k
    out = np.empty((steps + 1, 2))
    out[0, 0] = n
    out[0, 1] = p
    clamps = 0
    for i in range(steps):
        n, p = _em_update(m, c, k, n, p, delta, increments[i, 0], increments[i, 1])
        if n < 0.0:
            n = 0.0
            clamps += 1
        if p < 0.0:
            p = 0.0
            clamps += 1
        out[i + 1, 0] = n
        out[i + 1, 1] = p
    times = np.arange(steps + 1) * delta
    return SamplePath(
        times=times, states=out, clamp_events=clamps, seed=cfg.seed, stream_index=stream_index
    )


def _simulate_block(
    params: ModelParams,
    x0: State,
    cfg: SimConfig,
    stream_indices: range,
    stride: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized paths for a block of streams, recorded every `stride` steps.

    Returns (states, clamp_counts) with states of shape
    (len(stream_indices), m_steps // stride + 1, 2).  Elementwise arithmetic
    matches simulate_path bit for bit.
    """
    steps = cfg.m_steps
    delta = cfg.delta
    count = len(stream_indices)
    if cfg.zero_noise:
        increments = np.zeros((count, steps, 2))
    else:
        increments = np.empty((count, steps, 2))
        for row, stream in enumerate(stream_indices):
            increments[row] = NoiseStream(cfg.seed, stream).increments(steps, delta)
    m, c, k = params.m, params.c, params.k
    n = np.full(count, float(x0[0]))
    p = np.full(count, float(x0[1]))
    recorded = steps // stride + 1
    states = np.empty((count, recorded, 2))
    states[:, 0, 0] = n
    states[:, 0, 1] = p
    clamps = np.zeros(count, dtype=np.int64)
    row = 1
    for i in range(steps):
        n, p = _em_update(m, c, k, n, p, delta, increments[:, i, 0], increments[:, i, 1])
        neg_n = n < 0.0
        neg_p = p < 0.0
        if neg_n.any():
            clamps += neg_n
            n[neg_n] = 0.0
        if neg_p.any():
            clamps += neg_p
            p[neg_p] = 0.0
        if (i + 1) % stride == 0:
            states[:, row, 0] = n
            states[:, row, 1] = p
            row += 1
    return states, clamps


def strong_self_convergence(
    params: ModelParams,
    x0: State,
    t_end: float,
    seed: int,
    *,
    m_base: int = 256,
    n_levels: int = 4,
    stream_index: int = 0,
    zero_noise: bool = False,
) -> list[tuple[float, float]]:
    """Terminal-state gaps between nested step sizes on one Brownian path.

    The finest grid (m_base * 2**(n_levels-1) steps) draws the increments;
    every coarser grid sums them in consecutive groups, so all levels ride
    the same Brownian path.  Returns [(delta, |Y_T(delta) - Y_T(delta/2)|)]
    per adjacent pair, coarsest first; fewer than two levels yields [].
    """
    if m_base < 1:
        raise ValueError(f"m_base must be >= 1, got {m_base!r}")
    if n_levels < 2:
        return []
    fine_steps = m_base << (n_levels - 1)
    fine_delta = t_end / fine_steps
    cfg = SimConfig(t_end=t_end, m_steps=fine_steps, seed=seed, zero_noise=zero_noise)
    if cfg.zero_noise:
        fine_increments = np.zeros((fine_steps, 2))
    else:
        fine_increments = NoiseStream(seed, stream_index).increments(fine_steps, fine_delta)
    m, c, k = params.m, params.c, params.k
    finals = []
    for level in range(n_levels):
        level_steps = m_base << level
        group = fine_steps // level_steps
        level_increments = fine_increments.reshape(level_steps, group, 2).sum(axis=1)
        delta = t_end / level_steps
        n, p = float(x0[0]), float(x0[1])
        for i in range(level_steps):
            n, p = _em_update(m, c, k, n, p, delta, level_increments[i, 0], level_increments[i, 1])
            if n < 0.0:
                n = 0.0
            if p < 0.0:
                p = 0.0
        finals.append((n, p))
    report = []
    for level in range(n_levels - 1):
        delta = t_end / (m_base << level)
        gap = math.hypot(
            finals[level][0] - finals[level + 1][0],
            finals[level][1] - finals[level + 1][1],
        )
        report.append((delta, gap))
    return report
