"""Axisymmetric radial graphs over the 2-sphere and their curvature.

A hypersurface is written in geodesic polar coordinates as ``r = u(theta)``
with the ambient metric ``dr^2 + vartheta(r)^2 sigma``, where ``sigma`` is the
round metric and ``vartheta = r`` (Euclidean) or ``sinh r`` (hyperbolic).
The shape operator is evaluated through the rescaled variable
``phi = int_{r0}^{u} ds / vartheta(s)``, for which

    h^i_j = (vartheta' delta^i_j - (sigma^ik - phi^i phi^k / v^2) phi_;kj) / (v vartheta)

with ``v = sqrt(1 + |D phi|^2)``.  For axisymmetric ``phi`` the two
eigenvalues are the meridian curvature and the orbit curvature.
"""

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .curvature import CurvatureFunction, eval_F
from .errors import DomainError


class Ambient(enum.Enum):
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"

    @property
    def K(self):
        """Sectional curvature of the ambient space."""
        return 0.0 if self is Ambient.EUCLIDEAN else -1.0

    @property
    def hyperbolic(self):
        return self is Ambient.HYPERBOLIC

    def vartheta(self, r):
        r = np.asarray(r, dtype=float)
        return np.sinh(r) if self.hyperbolic else r

    def vartheta_prime(self, r):
        r = np.asarray(r, dtype=float)
        return np.cosh(r) if self.hyperbolic else np.ones_like(r)

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown ambient {value!r}") from None


def theta_fn(ambient, r):
    """``(vartheta(r), vartheta'(r))`` for a scalar ``r > 0``."""
    if not r > 0:
        raise DomainError(f"geodesic polar radius must be positive, got {r}")
    if ambient.hyperbolic:
        return float(np.sinh(r)), float(np.cosh(r))
    return float(r), 1.0


@dataclass(frozen=True)
class AxisymGrid:
    """Cell-centred grid ``theta_i = (i + 1/2) pi / n_theta`` on ``(0, pi)``."""

    n_theta: int
    theta: np.ndarray = field(init=False, repr=False, compare=False)
    d_theta: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n_theta) != self.n_theta or self.n_theta < 16:
            raise ValueError(f"n_theta must be an integer >= 16, got {self.n_theta}")
        d = np.pi / self.n_theta
        object.__setattr__(self, "d_theta", d)
        theta = (np.arange(self.n_theta) + 0.5) * d
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)

    def embed(self, u):
        """Meridian points ``(x, z) = u (sin theta, cos theta)``."""
        return u * np.sin(self.theta), u * np.cos(self.theta)


@dataclass(frozen=True)
class GraphState:
    ambient: Ambient
    grid: AxisymGrid
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        if u.shape != (self.grid.n_theta,):
            raise ValueError(f"u has shape {u.shape}, grid needs ({self.grid.n_theta},)")
        if not np.all(u > 0.0):
            raise DomainError("graph radius must be positive at every node")
        u.flags.writeable = False
        object.__setattr__(self, "u", u)

    def evolved(self, u, t):
        return replace(self, u=u, t=t)

    def reflected(self):
        """The same surface mirrored through the equatorial plane."""
        return replace(self, u=self.u[::-1].copy())


@dataclass(frozen=True)
class CurvatureField:
    v: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    F: np.ndarray
    phi: np.ndarray


def _default_r0(u):
    return 0.5 * float(np.min(u))


def phi_from_u(state, r0=None):
    """Rescaled radial variable ``phi = int_{r0}^{u} ds / vartheta(s)``."""
    r0 = _default_r0(state.u) if r0 is None else float(r0)
    u = state.u
    if not 0.0 < r0 < np.min(u):
        raise DomainError(f"reference radius r0={r0} must lie in (0, min u={np.min(u)})")
    if state.ambient.hyperbolic:
        # log tanh(x/2) written so that it stays accurate for large x
        def lt(x):
            e = np.exp(-x)
            return np.log1p(-e) - np.log1p(e)
        return lt(u) - lt(r0)
    return np.log(u / r0)


def _central_first(f, d):
    fp = np.concatenate(([f[0]], f, [f[-1]]))
    return (fp[2:] - fp[:-2]) / (2.0 * d)


def gradient_v(state):
    """``v = sqrt(1 + |D phi|^2)`` with central differences of ``phi``."""
    dphi = _central_first(phi_from_u(state), state.grid.d_theta)
    return np.sqrt(1.0 + dphi * dphi)


def gradient_v_from_u(state):
    """Same quantity through ``sqrt(1 + u'^2 / vartheta(u)^2)``."""
    du = _central_first(state.u, state.grid.d_theta)
    w = du / state.ambient.vartheta(state.u)
    return np.sqrt(1.0 + w * w)


def principal_curvatures(state):
    """Unsorted ``(v, kappa_meridian, kappa_orbit)`` from the active kernel."""
    g = state.grid
    return kernels.axisym_field(state.u, g.theta, g.d_theta, state.ambient.hyperbolic)


def weingarten_axisym(state, f=None, r0=None):
    """Principal curvatures and speed function of an axisymmetric graph.

    Parameters
    ----------
    state : GraphState
    f : CurvatureFunction, optional
        Speed function used to fill ``F``; defaults to the mean curvature.
        Nodes outside the admissible cone of ``f`` get ``F = nan``.
    r0 : float, optional
        Reference radius for ``phi``; defaults to ``min(u) / 2``.
    """
    f = CurvatureFunction.mean(2) if f is None else f
    v, ka, kb = principal_curvatures(state)
    if not (np.all(np.isfinite(ka)) and np.all(np.isfinite(kb))):
        raise FloatingPointError("non-finite curvature in finite differences")
    k1 = np.minimum(ka, kb)
    k2 = np.maximum(ka, kb)
    kappa = np.stack([k1, k2], axis=-1)
    try:
        F = eval_F(f, kappa)
    except DomainError:
        F = np.full(k1.shape, np.nan)
        ok = np.all(kappa > 0, axis=-1) | ((f.kind == "H") & (kappa.sum(axis=-1) > 0))
        if np.any(ok):
            F[ok] = eval_F(f, kappa[ok])
    return CurvatureField(v=v, kappa1=k1, kappa2=k2, F=F, phi=phi_from_u(state, r0))


def off_center_sphere(theta, d, radius=1.0):
    """Radial graph of the sphere of given radius centred at ``(0, d)`` on the axis."""
    s = np.sin(theta)
    return d * np.cos(theta) + np.sqrt(radius * radius - d * d * s * s)


def off_center_sphere_derivative(theta, d, radius=1.0):
    """Exact ``du/dtheta`` of :func:`off_center_sphere`."""
    s, c = np.sin(theta), np.cos(theta)
    return -d * s - d * d * s * c / np.sqrt(radius * radius - d * d * s * s)
