"""Radii of geodesic spheres moving by the power-law expanding flow.

A centred sphere of radius ``r`` stays a sphere and its radius obeys
``r' = (n vartheta'(r) / vartheta(r)) ** (-p)``.  In Euclidean space this
integrates in closed form and blows up in finite time; in hyperbolic space
the radius is integrated numerically with a step-doubling RK4 scheme.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import Ambient


def _check(r0, p):
    if not r0 > 0:
        raise DomainError(f"initial radius must be positive, got {r0}")
    if not p > 1:
        raise DomainError(f"exponent must satisfy p > 1, got {p}")


def euclid_blowup(r0, n, p):
    """Finite extinction (blow-up) time ``n**p / (p - 1) * r0**(1 - p)``."""
    _check(r0, p)
    return n ** p / (p - 1.0) * r0 ** (1.0 - p)


def euclid_radius(r0, n, p, t):
    """Closed-form radius of the Euclidean sphere at time ``t``."""
    T = euclid_blowup(r0, n, p)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t >= T):
        err = DomainError(f"t must lie in [0, T*) with T* = {T}")
        err.blowup_time = T
        raise err
    out = ((1.0 - p) / n ** p * t + r0 ** (1.0 - p)) ** (1.0 / (1.0 - p))
    return float(out) if out.ndim == 0 else out


def sphere_speed(ambient, r, n, p):
    """Radial speed of a centred geodesic sphere of radius ``r``."""
    if ambient is Ambient.HYPERBOLIC:
        return (n / np.tanh(r)) ** (-p)
    return (n / r) ** (-p)


def _rk4(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_sphere_ode(speed, r0, times, rtol=1e-12, h0=1e-3):
    """Adaptive step-doubling RK4 for the autonomous ODE ``r' = speed(r)``.

    Every accepted step is a pair of half steps whose distance to the full
    step stays below ``rtol`` (relative); the pair is then Richardson
    extrapolated.  Returns the radius at each of the non-decreasing
    ``times``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("times must be non-negative and non-decreasing")
    out = np.empty_like(times)
    t, r, h = 0.0, float(r0), h0
    for i, target in enumerate(times):
        while t < target:
            step = min(h, target - t)
            full = _rk4(speed, r, step)
            half = _rk4(speed, _rk4(speed, r, 0.5 * step), 0.5 * step)
            err = abs(half - full) / max(abs(half), 1e-300)
            if err <= rtol:
                t += step
                r = half + (half - full) / 15.0
                if err < rtol / 64.0:
                    h = 2.0 * step
            else:
                h = 0.5 * step
        out[i] = r
    return out


def hyperbolic_radius(r0, n, p, t, rtol=1e-12):
    """Radius of the hyperbolic geodesic sphere at time(s) ``t``."""
    _check(r0, p)
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    order = np.argsort(times, kind="stable")
    vals = np.empty_like(times)
    vals[order] = integrate_sphere_ode(
        lambda r: (n / np.tanh(r)) ** (-p), r0, times[order], rtol=rtol
    )
    return float(vals[0]) if scalar else vals


@dataclass(frozen=True)
class SphereSolution:
    ambient: Ambient
    r0: float
    n: int = 2
    p: float = 2.0

    def __post_init__(self):
        _check(self.r0, self.p)

    @property
    def blowup_time(self):
        if self.ambient is Ambient.HYPERBOLIC:
            return np.inf
        return euclid_blowup(self.r0, self.n, self.p)

    def radius(self, t):
        if self.ambient is Ambient.HYPERBOLIC:
            return hyperbolic_radius(self.r0, self.n, self.p, t)
        return euclid_radius(self.r0, self.n, self.p, t)

    def table(self, t_end, samples=101):
        """``(t, radius)`` rows on a uniform grid of ``[0, t_end]``."""
        if self.ambient is Ambient.EUCLIDEAN and t_end >= self.blowup_time:
            raise DomainError(f"t_end={t_end} is past the blow-up time {self.blowup_time}")
        t = np.linspace(0.0, t_end, samples)
        return np.column_stack([t, self.radius(t)])
