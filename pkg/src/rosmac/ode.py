"""Fixed-step integration of the deterministic system and long-run diagnosis."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .model import Drift, ModelParams, State, drift

__all__ = [
    "AsymptoticKind",
    "AsymptoticVerdict",
    "BatchSummary",
    "BlowupError",
    "Trajectory",
    "detect_asymptotics",
    "integrate",
    "integrate_batch",
    "vector_field_grid",
]

DEFAULT_DT = 1e-3

# Trailing-window thresholds used by detect_asymptotics.
_STATIONARY_RANGE = 1e-6
_EQUILIBRIUM_RESIDUAL = 1e-8
_PERIOD_STABILITY = 1e-3
_MIN_SAMPLES = 1000
_REQUIRED_INTERVALS = 5


class BlowupError(RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, message: str, last_good_index: int):
        super().__init__(message)
        self.last_good_index = last_good_index


@dataclass(frozen=True)
class Trajectory:
    """A sampled solution on the uniform grid times[i] = i * dt."""

    times: np.ndarray
    states: np.ndarray
    params: ModelParams
    dt: float
    clamp_count: int

    def __post_init__(self) -> None:
        self.times.flags.writeable = False
        self.states.flags.writeable = False

    def __len__(self) -> int:
        return len(self.times)

    def final_state(self) -> State:
        return State(float(self.states[-1, 0]), float(self.states[-1, 1]))


class BatchSummary(NamedTuple):
    """Online diagnostics of a batch integration (no stored trajectories)."""

    final_states: np.ndarray
    clamp_counts: np.ndarray
    max_total: np.ndarray


class AsymptoticKind(Enum):
    EQUILIBRIUM = "equilibrium"
    LIMIT_CYCLE = "limit_cycle"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class AsymptoticVerdict:
    kind: AsymptoticKind
    point: State | None = None
    period: float | None = None
    box: tuple[float, float, float, float] | None = None
    diagnostics: str = ""


def _rk4_update(m, c, k, n, p, h):
    """One classical RK4 step; identical expression for floats and arrays."""
    h2 = 0.5 * h
    inter = m * n * p / (1.0 + n)
    k1n = n * (1.0 - n / k) - inter
    k1p = -c * p + inter
    n1 = n + h2 * k1n
    p1 = p + h2 * k1p
    inter = m * n1 * p1 / (1.0 + n1)
    k2n = n1 * (1.0 - n1 / k) - inter
    k2p = -c * p1 + inter
    n2 = n + h2 * k2n
    p2 = p + h2 * k2p
    inter = m * n2 * p2 / (1.0 + n2)
    k3n = n2 * (1.0 - n2 / k) - inter
    k3p = -c * p2 + inter
    n3 = n + h * k3n
    p3 = p + h * k3p
    inter = m * n3 * p3 / (1.0 + n3)
    k4n = n3 * (1.0 - n3 / k) - inter
    k4p = -c * p3 + inter
    sixth = h / 6.0
    return (
        n + sixth * (k1n + 2.0 * k2n + 2.0 * k3n + k4n),
        p + sixth * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
    )


def _step_count(t_end: float, dt: float) -> int:
    if not (dt > 0.0) or not math.isfinite(dt):
        raise ValueError(f"dt must be finite and > 0, got {dt!r}")
    if not (t_end >= dt):
        raise ValueError(f"t_end must be at least one step, got t_end={t_end!r}, dt={dt!r}")
    return max(1, round(t_end / dt))


def integrate(params: ModelParams, x0: State, t_end: float, dt: float = DEFAULT_DT) -> Trajectory:
    """March the deterministic system with classical RK4 on a fixed grid.

    The step count is round(t_end / dt), so the final time is the nearest
    grid multiple of dt.  Steps that land a component below zero are clamped
    to zero and counted; for interior starts at sane steps the count stays 0.
    A non-finite state aborts with BlowupError carrying the last good index.
    """
    n, p = float(x0[0]), float(x0[1])
    if n < 0.0 or p < 0.0:
        raise ValueError(f"x0 must lie in the closed quadrant, got {x0!r}")
    steps = _step_count(t_end, dt)
    m, c, k = params.m, params.c, params.k
    out = np.empty((steps + 1, 2))
    out[0, 0] = n
    out[0, 1] = p
    clamps = 0
    for i in range(1, steps + 1):
        n, p = _rk4_update(m, c, k, n, p, dt)
        if n < 0.0:
            n = 0.0
            clamps += 1
        if p < 0.0:
            p = 0.0
            clamps += 1
        if not (math.isfinite(n) and math.isfinite(p)):
            raise BlowupError(
                f"non-finite state at step {i} (t={i * dt}); dt likely too large",
                last_good_index=i - 1,
            )
        out[i, 0] = n
        out[i, 1] = p
    times = np.arange(steps + 1) * dt
    return Trajectory(times=times, states=out, params=params, dt=dt, clamp_count=clamps)


def integrate_batch(
    params: ModelParams, x0s: np.ndarray, t_end: float, dt: float = DEFAULT_DT
) -> BatchSummary:
    """Integrate many starts at once, tracking only summary diagnostics.

    x0s has shape (batch, 2).  Returns final states, per-path clamp counts,
    and the per-path running maximum of n + p (for confinement checks)
    without materializing the trajectories.
    """
    x0s = np.asarray(x0s, dtype=float)
    if x0s.ndim != 2 or x0s.shape[1] != 2:
        raise ValueError(f"x0s must have shape (batch, 2), got {x0s.shape}")
    if (x0s < 0.0).any():
        raise ValueError("all starts must lie in the closed quadrant")
    steps = _step_count(t_end, dt)
    m, c, k = params.m, params.c, params.k
    n = x0s[:, 0].copy()
    p = x0s[:, 1].copy()
    clamps = np.zeros(len(x0s), dtype=np.int64)
    max_total = n + p
    for i in range(1, steps + 1):
        n, p = _rk4_update(m, c, k, n, p, dt)
        neg_n = n < 0.0
        neg_p = p < 0.0
        if neg_n.any():
            clamps += neg_n
            n[neg_n] = 0.0
        if neg_p.any():
            clamps += neg_p
            p[neg_p] = 0.0
        if not (np.isfinite(n).all() and np.isfinite(p).all()):
            raise BlowupError(
                f"non-finite state at step {i} (t={i * dt}); dt likely too large",
                last_good_index=i - 1,
            )
        np.maximum(max_total, n + p, out=max_total)
    return BatchSummary(
        final_states=np.stack([n, p], axis=1),
        clamp_counts=clamps,
        max_total=max_total,
    )


def vector_field_grid(
    params: ModelParams,
    n_min: float,
    n_max: float,
    p_min: float,
    p_max: float,
    resolution: int,
) -> list[tuple[State, Drift]]:
    """Drift sampled on a uniform grid, endpoints included, row-major in n."""
    if not (n_min <= n_max and p_min <= p_max):
        raise ValueError("grid bounds must be ordered")
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    ns = np.linspace(n_min, n_max, resolution)
    ps = np.linspace(p_min, p_max, resolution)
    samples = []
    for n in ns:
        for p in ps:
            x = State(float(n), float(p))
            samples.append((x, drift(params, x)))
    return samples


def _upward_crossings(times: np.ndarray, values: np.ndarray, level: float) -> np.ndarray:
    """Times where values crosses level from below, linearly interpolated."""
    below = values[:-1] < level
    at_or_above = values[1:] >= level
    idx = np.nonzero(below & at_or_above)[0]
    if len(idx) == 0:
        return np.empty(0)
    frac = (level - values[idx]) / (values[idx + 1] - values[idx])
    return times[idx] + frac * (times[idx + 1] - times[idx])


def detect_asymptotics(traj: Trajectory, tail_fraction: float = 0.25) -> AsymptoticVerdict:
    """Diagnose the trailing window of a trajectory.

    A window whose per-component range is below 1e-6 is an equilibrium
    (confirmed against the drift); otherwise stable spacing of the last five
    upward mean-crossings of n declares a limit cycle with that period and
    the window bounding box.  Anything else is undecided.
    """
    if len(traj) < _MIN_SAMPLES:
        raise ValueError(f"need at least {_MIN_SAMPLES} samples, got {len(traj)}")
    if not (0.0 < tail_fraction <= 0.5):
        raise ValueError(f"tail_fraction must lie in (0, 0.5], got {tail_fraction!r}")
    start = len(traj) - max(2, int(len(traj) * tail_fraction))
    window = traj.states[start:]
    times = traj.times[start:]
    lo = window.min(axis=0)
    hi = window.max(axis=0)
    ranges = hi - lo
    if ranges[0] < _STATIONARY_RANGE and ranges[1] < _STATIONARY_RANGE:
        point = State(float(window[:, 0].mean()), float(window[:, 1].mean()))
        residual = drift(traj.params, point)
        if max(abs(residual.dn), abs(residual.dp)) < _EQUILIBRIUM_RESIDUAL:
            return AsymptoticVerdict(
                kind=AsymptoticKind.EQUILIBRIUM,
                point=point,
                diagnostics=f"window range {ranges.max():.3e}, residual ok",
            )
        return AsymptoticVerdict(
            kind=AsymptoticKind.UNDECIDED,
            diagnostics=(
                f"window stationary (range {ranges.max():.3e}) but drift "
                f"residual {max(abs(residual.dn), abs(residual.dp)):.3e} too large"
            ),
        )
    crossings = _upward_crossings(times, window[:, 0], float(window[:, 0].mean()))
    if len(crossings) >= _REQUIRED_INTERVALS + 1:
        intervals = np.diff(crossings)[-_REQUIRED_INTERVALS:]
        period = float(intervals.mean())
        spread = float(np.abs(intervals - period).max())
        if spread <= _PERIOD_STABILITY * period:
            return AsymptoticVerdict(
                kind=AsymptoticKind.LIMIT_CYCLE,
                period=period,
                box=(float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1])),
                diagnostics=f"{len(crossings)} crossings, interval spread {spread:.3e}",
            )
        return AsymptoticVerdict(
            kind=AsymptoticKind.UNDECIDED,
            diagnostics=(
                f"crossing intervals unstable: spread {spread:.3e} "
                f"vs tolerance {_PERIOD_STABILITY * period:.3e}"
            ),
        )
    return AsymptoticVerdict(
        kind=AsymptoticKind.UNDECIDED,
        diagnostics=f"only {len(crossings)} upward mean-crossings in window",
    )
