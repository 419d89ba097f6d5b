"""Monitored quantities along a flow: pinching, sphere distance, decay fits.

Pinching is measured with the shifted curvatures ``b_i = kappa_i + K``
(``K = 0`` Euclidean, ``K = -1`` hyperbolic) through

    z = |b|^2 - gamma B^2,   B = sum(b_i),   gamma = 1/n + c0,

so ``z < 0`` is the strict pinching condition.
"""

from dataclasses import dataclass, fields, replace

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .curvature import CurvatureFunction, phi_suite
from .errors import DomainError, FitError
from .geometry import weingarten_axisym

N_DIM = 2


@dataclass(frozen=True)
class PinchingConfig:
    c0: float
    n: int = N_DIM

    def __post_init__(self):
        hi = 1.0 / (self.n * (self.n - 1))
        if not 0.0 < self.c0 < hi:
            raise DomainError(f"c0 must lie in (0, {hi}), got {self.c0}")

    @property
    def gamma(self):
        return 1.0 / self.n + self.c0


def pinching_nodes(kappa1, kappa2, ambient, cfg):
    """Pointwise ``(z, B)`` for the two principal curvatures."""
    b1 = np.asarray(kappa1, dtype=float) + ambient.K
    b2 = np.asarray(kappa2, dtype=float) + ambient.K
    B = b1 + b2
    return b1 * b1 + b2 * b2 - cfg.gamma * B * B, B


def pinching_z(field, ambient, cfg):
    """``(z_max, B_min)`` over the nodes of a curvature field."""
    z, B = pinching_nodes(field.kappa1, field.kappa2, ambient, cfg)
    return float(z.max()), float(B.min())


@dataclass(frozen=True)
class PinchingCheck:
    passed: bool
    z_max: float
    worst_node: int
    kappa_min: float


def validate_initial_pinching(state, cfg, f=None):
    """Strict pinching plus (horo)convexity of an initial graph.

    Passes iff ``z < 0`` everywhere and every curvature exceeds ``0``
    (Euclidean) or ``1`` (hyperbolic).  ``worst_node`` is the argmax of ``z``.
    """
    field = weingarten_axisym(state, f)
    z, _ = pinching_nodes(field.kappa1, field.kappa2, state.ambient, cfg)
    worst = int(np.argmax(z))
    k_min = float(field.kappa1.min())
    floor = 1.0 if state.ambient.hyperbolic else 0.0
    return PinchingCheck(bool(z.max() < 0.0 and k_min > floor), float(z[worst]), worst, k_min)


# ---------------------------------------------------------------------------
# distance to spheres
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SphereFit:
    center_offset: float
    radius: float
    dist_hausdorff: float


def _star_shaped_about(x, z, d):
    ang = np.arctan2(x, z - d)
    return bool(np.all(np.diff(ang) > 0.0))


def best_fit_sphere_axisym(state, xatol=1e-13):
    """Sphere with centre on the symmetry axis closest in sup radial deviation.

    For a fixed centre offset ``d`` the optimal radius is the midrange of the
    distances from ``(0, d)`` to the meridian nodes, and the deviation is
    half their range; ``d`` is then optimised by bounded scalar search.
    Offsets about which the meridian is not star-shaped are rejected.  The
    hyperbolic variant only considers the centre of the coordinates.
    """
    u = state.u
    if state.ambient.hyperbolic:
        lo, hi = float(u.min()), float(u.max())
        return SphereFit(0.0, 0.5 * (lo + hi), 0.5 * (hi - lo))
    x, z = state.grid.embed(u)
    half = 0.5 * float(u.min())

    def spread(d):
        if not _star_shaped_about(x, z, d):
            return np.inf
        return kernels.radial_spread(x, z, d)[0]

    res = minimize_scalar(spread, bounds=(-half, half), method="bounded",
                          options={"xatol": xatol * max(1.0, half)})
    d = float(res.x)
    # the bounded search stops at ~sqrt(eps) |d|; polish around d in a shifted variable
    w = 1e-6 * max(1.0, abs(d))
    res = minimize_scalar(lambda e: spread(d + e), bounds=(-w, w), method="bounded",
                          options={"xatol": xatol * w})
    if res.fun <= spread(d):
        d = d + float(res.x)
    dist, radius = kernels.radial_spread(x, z, d)
    d0, r0 = kernels.radial_spread(x, z, 0.0)
    if d0 <= dist:
        d, dist, radius = 0.0, d0, r0
    return SphereFit(d, float(radius), float(dist))


# ---------------------------------------------------------------------------
# rate fits
# ---------------------------------------------------------------------------

def _window_mask(t, window, discard):
    t = np.asarray(t, dtype=float)
    if window is not None:
        lo, hi = window
        return (t >= lo) & (t <= hi)
    mask = np.ones(t.size, dtype=bool)
    mask[: int(np.floor(discard * t.size))] = False
    return mask


def fit_decay_rate(t, y, window=None, discard=0.2, min_samples=10):
    """Exponential decay rate ``lambda`` of ``y ~ c exp(-lambda t)``.

    Least-squares slope of ``log y`` against ``t``, negated.  Either an
    explicit ``window = (t_lo, t_hi)`` or the leading ``discard`` fraction of
    the samples is excluded.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = _window_mask(t, window, discard)
    if mask.sum() < min_samples:
        raise FitError(f"need at least {min_samples} samples in the window, got {mask.sum()}")
    if np.any(~(y[mask] > 0.0)):
        raise FitError("decay fit needs y > 0 on the window")
    slope = np.polyfit(t[mask], np.log(y[mask]), 1)[0]
    return float(-slope)


def hausdorff_decay_exponent(theta_ref, dist, decades=1.0, floor=1e-13, min_samples=5):
    """Slope of ``log dist`` against ``log theta_ref`` over the final decades.

    Samples with ``dist`` below ``floor`` are dropped (the window is
    truncated there).
    """
    R = np.asarray(theta_ref, dtype=float)
    dist = np.asarray(dist, dtype=float)
    ok = np.isfinite(R) & (R > 0.0) & np.isfinite(dist)
    R, dist = R[ok], dist[ok]
    if R.size == 0:
        raise FitError("no usable samples")
    if R.max() / R.min() < 10.0 ** decades * 0.999:
        raise FitError("reference radius does not span the requested decades")
    mask = R >= R.max() / 10.0 ** decades
    below = np.nonzero(mask & (dist < floor))[0]
    if below.size:
        mask[below[0]:] = False
    if mask.sum() < min_samples:
        raise FitError(f"need at least {min_samples} samples above the floor")
    return float(np.polyfit(np.log(R[mask]), np.log(dist[mask]), 1)[0])


# ---------------------------------------------------------------------------
# per-record diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    dt: float
    u_min: float
    u_max: float
    osc: float
    v_max: float
    kappa_min: float
    kappa_max: float
    F_min: float
    F_max: float
    z_max: float
    B_min: float
    chi_max: float
    theta_ref: float = np.nan
    u_tilde_min: float = np.nan
    u_tilde_max: float = np.nan
    kt_min: float = np.nan
    kt_max: float = np.nan
    dist_sphere: float = np.nan


SERIES_COLUMNS = tuple(f.name for f in fields(DiagnosticsRecord))


def make_record(state, field, dt, cfg):
    """Record of one state; the reference-radius columns are filled later."""
    u = state.u
    z_max, B_min = pinching_z(field, state.ambient, cfg)
    chi = field.v / state.ambient.vartheta(u)
    return DiagnosticsRecord(
        t=float(state.t),
        dt=float(dt),
        u_min=float(u.min()),
        u_max=float(u.max()),
        osc=float(u.max() - u.min()),
        v_max=float(field.v.max()),
        kappa_min=float(field.kappa1.min()),
        kappa_max=float(field.kappa2.max()),
        F_min=float(np.min(field.F)),
        F_max=float(np.max(field.F)),
        z_max=z_max,
        B_min=B_min,
        chi_max=float(chi.max()),
        dist_sphere=best_fit_sphere_axisym(state).dist_hausdorff,
    )


def rescaled(record, ambient, theta_ref):
    """Fill the reference-radius columns of a record.

    Euclidean: ``u / Theta`` and ``Theta kappa``.  Hyperbolic: ``u - t/n^p``
    (the bounded drift) and the curvatures themselves.
    """
    if ambient.hyperbolic:
        return replace(record, theta_ref=theta_ref,
                       u_tilde_min=record.u_min - theta_ref,
                       u_tilde_max=record.u_max - theta_ref,
                       kt_min=record.kappa_min, kt_max=record.kappa_max)
    return replace(record, theta_ref=theta_ref,
                   u_tilde_min=record.u_min / theta_ref,
                   u_tilde_max=record.u_max / theta_ref,
                   kt_min=theta_ref * record.kappa_min,
                   kt_max=theta_ref * record.kappa_max)


def series_column(records, name):
    return np.array([getattr(r, name) for r in records], dtype=float)


def curvature_deviation(records):
    """``max |kappa_i - 1|`` per record."""
    lo = series_column(records, "kappa_min")
    hi = series_column(records, "kappa_max")
    return np.maximum(np.abs(lo - 1.0), np.abs(hi - 1.0))


# ---------------------------------------------------------------------------
# evolution of the speed
# ---------------------------------------------------------------------------

def _ghost(f):
    return np.concatenate(([f[0]], f, [f[-1]]))


def laplace_beltrami(state, f):
    """Laplacian of an axisymmetric nodal function on the induced metric.

    Conservative form ``(a f')' / sqrt(G)`` with ``a = vartheta sin / sqrt(g_tt)``
    evaluated on half nodes; ``a`` vanishes on the poles.
    """
    g = state.grid
    d = g.d_theta
    u = state.u
    th_half = np.arange(g.n_theta + 1) * d
    up = _ghost(u)
    u_half = 0.5 * (up[1:] + up[:-1])
    du_half = (up[1:] - up[:-1]) / d
    vt_half = state.ambient.vartheta(u_half)
    a = vt_half * np.sin(th_half) / np.sqrt(du_half ** 2 + vt_half ** 2)
    a[0] = a[-1] = 0.0
    fp = _ghost(f)
    flux = a * (fp[1:] - fp[:-1]) / d
    du = (up[2:] - up[:-2]) / (2.0 * d)
    vt = state.ambient.vartheta(u)
    sqrt_G = np.sqrt(du ** 2 + vt ** 2) * vt * np.sin(g.theta)
    return (flux[1:] - flux[:-1]) / d / sqrt_G


def speed_evolution_residual(prev, cur, nxt, p, f=None):
    """Discrete residual of the evolution equation of ``Phi = -F^{-p}``.

    With ``F = H`` (so ``F^{ij} = g^{ij}``) the residual at the middle state is

        dPhi/dt - Phi' Lap(Phi) - Phi' |A|^2 Phi - K n Phi' Phi,

    where ``dPhi/dt`` follows the normal trajectories: the partial derivative
    at fixed ``theta`` (three-point, non-uniform in time) plus
    ``Phi_theta * dtheta/dt`` with ``dtheta/dt = -F^{-p} u_theta / (v vartheta^2)``.
    """
    f = CurvatureFunction.mean(N_DIM) if f is None else f
    if not f.has_analytic_gradient:
        raise ValueError("the residual check needs F^{ij} in closed form (F = H)")
    fields_ = [weingarten_axisym(s, f) for s in (prev, cur, nxt)]
    Phis = [phi_suite(p, fl.F)[0] for fl in fields_]
    h1 = cur.t - prev.t
    h2 = nxt.t - cur.t
    if not (h1 > 0 and h2 > 0):
        raise ValueError("states must be strictly increasing in time")
    dPhi_dt = (-h2 / (h1 * (h1 + h2)) * Phis[0]
               + (h2 - h1) / (h1 * h2) * Phis[1]
               + h1 / (h2 * (h1 + h2)) * Phis[2])
    fl = fields_[1]
    Phi, dPhi, _ = phi_suite(p, fl.F)
    d = cur.grid.d_theta
    up = _ghost(cur.u)
    u_theta = (up[2:] - up[:-2]) / (2.0 * d)
    Pp = _ghost(Phi)
    Phi_theta = (Pp[2:] - Pp[:-2]) / (2.0 * d)
    vt = cur.ambient.vartheta(cur.u)
    theta_dot = -(fl.F ** -p) * u_theta / (fl.v * vt * vt)
    total = dPhi_dt + Phi_theta * theta_dot
    A2 = fl.kappa1 ** 2 + fl.kappa2 ** 2
    lap = laplace_beltrami(cur, Phi)
    K = cur.ambient.K
    return total - dPhi * lap - dPhi * A2 * Phi - K * N_DIM * dPhi * Phi
