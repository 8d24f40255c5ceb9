"""Core definitions of the predator-prey model and its noisy extension.

The dimensional system tracks a prey density ``N`` growing logistically and a
predator density ``P`` feeding on it through a saturating (Holling type II)
response:

    dN/dt = r N (1 - N/K) - s N P / (1 + s tau N)
    dP/dt = -c P + d s N P / (1 + s tau N)

Rescaling prey by ``X = 1/(s tau)``, predator by ``Y = d X`` and time by
``1/r`` collapses the six raw parameters to three:

    dN/dt = N (1 - N/k) - m N P / (1 + N)
    dP/dt = -c P + m N P / (1 + N)

All downstream analysis works with the reduced triple ``(m, c, k)``.  The
demographic-noise extension keeps the same drift and adds one independent
Brownian motion per component with diagonal diffusion

    g11 = sqrt(N (1 + N/k) + m N P / (1 + N))
    g22 = sqrt(c P + m N P / (1 + N))

so the noise variance matches the total event rate (births plus deaths plus
conversions) of each species.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "Diffusion",
    "Drift",
    "ModelParams",
    "RawParams",
    "Scales",
    "ScalarField",
    "State",
    "diffusion",
    "drift",
    "generator_apply",
    "lyapunov_candidate",
    "nondimensionalize",
]


class State(NamedTuple):
    """A point (n, p) in the closed positive quadrant."""

    n: float
    p: float

    def interior(self) -> bool:
        return self.n > 0.0 and self.p > 0.0


class Drift(NamedTuple):
    dn: float
    dp: float


class Diffusion(NamedTuple):
    """Diagonal diffusion amplitudes; off-diagonal entries are zero."""

    g11: float
    g22: float


class Scales(NamedTuple):
    """Conversion factors from reduced to dimensional coordinates.

    prey:     dimensional prey units per reduced unit (X)
    predator: dimensional predator units per reduced unit (Y)
    time:     dimensional time units per reduced unit (1/r)
    """

    prey: float
    predator: float
    time: float


@dataclass(frozen=True)
class RawParams:
    """Dimensional parameters, all strictly positive.

    r:   prey intrinsic growth rate
    K:   prey carrying capacity
    s:   predator search rate
    tau: handling time per captured prey
    c:   predator per-capita death rate
    d:   prey-to-predator conversion efficiency
    """

    r: float
    K: float
    s: float
    tau: float
    c: float
    d: float

    def __post_init__(self) -> None:
        for name in ("r", "K", "s", "tau", "c", "d"):
            value = getattr(self, name)
            if not (value > 0.0) or not np.isfinite(value):
                raise ValueError(f"RawParams.{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Reduced parameters: interaction strength m, death rate c, capacity k."""

    m: float
    c: float
    k: float

    def __post_init__(self) -> None:
        for name in ("m", "c", "k"):
            value = getattr(self, name)
            if not (value > 0.0) or not np.isfinite(value):
                raise ValueError(f"ModelParams.{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class ScalarField:
    """A twice-differentiable scalar function on the quadrant.

    value:    (n, p) -> float
    gradient: (n, p) -> (d/dn, d/dp)
    hessian:  (n, p) -> 2x2 symmetric ndarray
    """

    value: Callable[[float, float], float]
    gradient: Callable[[float, float], tuple[float, float]]
    hessian: Callable[[float, float], np.ndarray]


def nondimensionalize(raw: RawParams) -> tuple[ModelParams, Scales]:
    """Reduce dimensional parameters to (m, c, k) plus the scale factors.

    The map is fixed: prey scale X = 1/(s*tau), predator scale Y = d*X,
    time scale 1/r, then m = d/(tau*r), c = c_raw/r, k = K/X.  Only the
    forward direction is provided; the scales suffice to undo it by hand.
    """
    x_scale = 1.0 / (raw.s * raw.tau)
    y_scale = raw.d * x_scale
    params = ModelParams(
        m=raw.d / (raw.tau * raw.r),
        c=raw.c / raw.r,
        k=raw.K / x_scale,
    )
    return params, Scales(prey=x_scale, predator=y_scale, time=1.0 / raw.r)


def _drift_terms(m, c, k, n, p):
    """Reduced vector field; accepts floats or same-shape numpy arrays."""
    interaction = m * n * p / (1.0 + n)
    return n * (1.0 - n / k) - interaction, -c * p + interaction


def _diffusion_variances(m, c, k, n, p):
    """Squared diffusion amplitudes (event-rate sums); floats or arrays."""
    interaction = m * n * p / (1.0 + n)
    return n * (1.0 + n / k) + interaction, c * p + interaction


def drift(params: ModelParams, x: State) -> Drift:
    """Deterministic vector field at x; total on the closed quadrant."""
    n, p = x
    dn, dp = _drift_terms(params.m, params.c, params.k, n, p)
    return Drift(float(dn), float(dp))


def diffusion(params: ModelParams, x: State) -> Diffusion:
    """Diagonal noise amplitudes at x; requires n >= 0 and p >= 0."""
    n, p = x
    if n < 0.0 or p < 0.0:
        raise ValueError(f"diffusion requires a state in the closed quadrant, got {x!r}")
    v1, v2 = _diffusion_variances(params.m, params.c, params.k, n, p)
    return Diffusion(float(np.sqrt(v1)), float(np.sqrt(v2)))


def generator_apply(params: ModelParams, field: ScalarField, x: State) -> float:
    """Apply the diffusion generator L to a scalar field at an interior point.

    L f = mu . grad f + (1/2) (g11^2 f_nn + g22^2 f_pp); the mixed second
    derivative never enters because the diffusion matrix is diagonal.
    """
    n, p = x
    if not (n > 0.0 and p > 0.0):
        raise ValueError(f"generator_apply requires an interior point, got {x!r}")
    dn, dp = _drift_terms(params.m, params.c, params.k, n, p)
    v1, v2 = _diffusion_variances(params.m, params.c, params.k, n, p)
    grad_n, grad_p = field.gradient(n, p)
    hess = field.hessian(n, p)
    return float(dn * grad_n + dp * grad_p + 0.5 * (v1 * hess[0][0] + v2 * hess[1][1]))


def lyapunov_candidate(alpha: float) -> ScalarField:
    """The radial test function V(n, p) = (1 + n^2 + p^2)**alpha, alpha > 2.

    Closed-form derivatives, with u = 1 + n^2 + p^2:

        dV/dn    = 2 alpha n u**(alpha-1)
        d2V/dn2  = 2 alpha u**(alpha-1) + 4 alpha (alpha-1) n^2 u**(alpha-2)
        d2V/dndp = 4 alpha (alpha-1) n p u**(alpha-2)

    and symmetrically in p.
    """
    if not (alpha > 2.0):
        raise ValueError(f"lyapunov_candidate requires alpha > 2, got {alpha!r}")
    a = float(alpha)

    def value(n: float, p: float) -> float:
        return (1.0 + n * n + p * p) ** a

    def gradient(n: float, p: float) -> tuple[float, float]:
        scale = 2.0 * a * (1.0 + n * n + p * p) ** (a - 1.0)
        return (scale * n, scale * p)

    def hessian(n: float, p: float) -> np.ndarray:
        u = 1.0 + n * n + p * p
        diag = 2.0 * a * u ** (a - 1.0)
        cross = 4.0 * a * (a - 1.0) * u ** (a - 2.0)
        return np.array(
            [
                [diag + cross * n * n, cross * n * p],
                [cross * n * p, diag + cross * p * p],
            ]
        )

    return ScalarField(value=value, gradient=gradient, hessian=hessian)
