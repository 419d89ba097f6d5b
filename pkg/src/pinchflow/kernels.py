"""Hot numeric kernels for the axisymmetric graph flow.

Every kernel exists twice: a loop form compiled with numba and a vectorized
numpy form.  The module-level names (``axisym_field``, ``flow_field``,
``midpoint_step``, ``radial_spread``, ``step_scalars``) point at one of the two families
depending on :data:`pinchflow._accel.USE_NUMBA`; both families stay importable
under ``nb_*`` / ``np_*`` names so they can be compared directly.

Conventions shared by both families
-----------------------------------
* ``u`` lives on a cell-centred grid ``theta_i = (i + 1/2) * dtheta``.
* Values beyond the poles come from reflection ghosts ``u(-theta) = u(theta)``
  and ``u(pi + s) = u(pi - s)``.
* The graph is differentiated through ``g(u) = int du / vartheta(u)`` up to an
  additive constant: ``log u`` (Euclidean) or ``log tanh(u/2)`` (hyperbolic).
* ``fcode`` selects the speed function for ``n = 2``: ``1`` is ``H`` and
  ``2`` is ``2 sqrt(kappa_1 kappa_2)``.  Outside the admissible cone the
  returned ``F`` is ``0`` so callers see a degenerate speed.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "axisym_field",
    "flow_field",
    "midpoint_step",
    "radial_spread",
    "step_scalars",
    "np_step_scalars",
    "nb_step_scalars",
    "np_axisym_field",
    "np_flow_field",
    "np_midpoint_step",
    "np_radial_spread",
    "nb_axisym_field",
    "nb_flow_field",
    "nb_midpoint_step",
    "nb_radial_spread",
]


# ---------------------------------------------------------------------------
# numpy family
# ---------------------------------------------------------------------------

def _np_log_coordinate(u, hyperbolic):
    if hyperbolic:
        e = np.exp(-u)
        return np.log1p(-e) - np.log1p(e)
    return np.log(u)


def np_axisym_field(u, theta, dtheta, hyperbolic):
    """Return ``(v, kappa_theta, kappa_orbit)`` at every node."""
    g = _np_log_coordinate(u, hyperbolic)
    gp = np.empty(g.size + 2)
    gp[1:-1] = g
    gp[0] = g[0]
    gp[-1] = g[-1]
    d1 = (gp[2:] - gp[:-2]) / (2.0 * dtheta)
    d2 = (gp[2:] - 2.0 * g + gp[:-2]) / (dtheta * dtheta)
    if hyperbolic:
        vt, vtp = np.sinh(u), np.cosh(u)
    else:
        vt, vtp = u, np.ones_like(u)
    v = np.sqrt(1.0 + d1 * d1)
    k_theta = (vtp - d2 / (v * v)) / (v * vt)
    k_orbit = (vtp - d1 * np.cos(theta) / np.sin(theta)) / (v * vt)
    return v, k_theta, k_orbit


def _np_speed_function(ka, kb, fcode):
    if fcode == 1:
        return ka + kb
    return np.where((ka > 0.0) & (kb > 0.0), 2.0 * np.sqrt(np.abs(ka * kb)), 0.0)


def np_flow_field(u, theta, dtheta, hyperbolic, fcode, p):
    """Field plus speed function ``F`` and radial velocity ``v / F**p``.

    The velocity is ``nan`` wherever ``F <= 0``.
    """
    v, ka, kb = np_axisym_field(u, theta, dtheta, hyperbolic)
    F = _np_speed_function(ka, kb, fcode)
    with np.errstate(divide="ignore", invalid="ignore"):
        speed = np.where(F > 0.0, v * np.power(np.abs(F), -p), np.nan)
    return v, ka, kb, F, speed


def np_midpoint_step(u, speed, theta, dtheta, hyperbolic, fcode, p, dt):
    """Explicit midpoint update given the speed already evaluated at ``u``.

    Returns ``(u_new, ok)``; ``ok`` is False if the midpoint state has a
    non-positive speed function somewhere.
    """
    u_mid = u + 0.5 * dt * speed
    speed_mid = np_flow_field(u_mid, theta, dtheta, hyperbolic, fcode, p)[4]
    if not np.all(np.isfinite(speed_mid)):
        return u, False
    return u + dt * speed_mid, True


def np_radial_spread(x, z, d):
    """Half spread and midrange of distances from ``(0, d)`` to ``(x, z)``."""
    r = np.hypot(x, z - d)
    lo, hi = r.min(), r.max()
    return 0.5 * (hi - lo), 0.5 * (hi + lo)


def np_step_scalars(u, v, ka, kb, F, speed, dtheta, hyperbolic, p, gamma, safety,
                    max_rel_change):
    """Per-step monitors and time-step limits.

    Returns ``(F_min, z_max, kappa_min, u_max, dt_cfl, dt_change)`` where
    ``z = |b|^2 - gamma B^2`` with ``b`` the shifted curvatures ``kappa + K``
    and the two limits are the diffusive bound
    ``safety * min((vartheta(u) dtheta)^2 F^(p+1) / (p v n))`` and the cap on
    ``max |du| / u``.
    """
    shift = -1.0 if hyperbolic else 0.0
    b1 = ka + shift
    b2 = kb + shift
    z = b1 * b1 + b2 * b2 - gamma * (b1 + b2) ** 2
    vt = np.sinh(u) if hyperbolic else u
    with np.errstate(invalid="ignore"):
        dt_cfl = safety * np.min((vt * dtheta) ** 2 * np.abs(F) ** (p + 1.0) / (2.0 * p * v))
        dt_change = max_rel_change * np.min(u / speed)
    return (float(F.min()), float(z.max()), float(min(ka.min(), kb.min())),
            float(u.max()), float(dt_cfl), float(dt_change))


# ---------------------------------------------------------------------------
# numba family
# ---------------------------------------------------------------------------

@njit
def _nb_log_coordinate(x, hyperbolic):
    if hyperbolic:
        e = math.exp(-x)
        return math.log1p(-e) - math.log1p(e)
    return math.log(x)


@njit
def nb_axisym_field(u, theta, dtheta, hyperbolic):
    n = u.shape[0]
    g = np.empty(n)
    for i in range(n):
        g[i] = _nb_log_coordinate(u[i], hyperbolic)
    v = np.empty(n)
    k_theta = np.empty(n)
    k_orbit = np.empty(n)
    inv2h = 1.0 / (2.0 * dtheta)
    invh2 = 1.0 / (dtheta * dtheta)
    for i in range(n):
        gl = g[i - 1] if i > 0 else g[0]
        gr = g[i + 1] if i < n - 1 else g[n - 1]
        d1 = (gr - gl) * inv2h
        d2 = (gr - 2.0 * g[i] + gl) * invh2
        if hyperbolic:
            vt = math.sinh(u[i])
            vtp = math.cosh(u[i])
        else:
            vt = u[i]
            vtp = 1.0
        vi = math.sqrt(1.0 + d1 * d1)
        v[i] = vi
        k_theta[i] = (vtp - d2 / (vi * vi)) / (vi * vt)
        k_orbit[i] = (vtp - d1 * math.cos(theta[i]) / math.sin(theta[i])) / (vi * vt)
    return v, k_theta, k_orbit


@njit
def nb_flow_field(u, theta, dtheta, hyperbolic, fcode, p):
    v, ka, kb = nb_axisym_field(u, theta, dtheta, hyperbolic)
    n = u.shape[0]
    F = np.empty(n)
    speed = np.empty(n)
    for i in range(n):
        if fcode == 1:
            f = ka[i] + kb[i]
        elif ka[i] > 0.0 and kb[i] > 0.0:
            f = 2.0 * math.sqrt(ka[i] * kb[i])
        else:
            f = 0.0
        F[i] = f
        speed[i] = v[i] * f ** (-p) if f > 0.0 else np.nan
    return v, ka, kb, F, speed


@njit
def nb_midpoint_step(u, speed, theta, dtheta, hyperbolic, fcode, p, dt):
    n = u.shape[0]
    u_mid = np.empty(n)
    for i in range(n):
        u_mid[i] = u[i] + 0.5 * dt * speed[i]
    speed_mid = nb_flow_field(u_mid, theta, dtheta, hyperbolic, fcode, p)[4]
    u_new = np.empty(n)
    for i in range(n):
        s = speed_mid[i]
        if not math.isfinite(s):
            return u.copy(), False
        u_new[i] = u[i] + dt * s
    return u_new, True


@njit
def nb_radial_spread(x, z, d):
    lo = np.inf
    hi = -np.inf
    for i in range(x.shape[0]):
        r = math.hypot(x[i], z[i] - d)
        if r < lo:
            lo = r
        if r > hi:
            hi = r
    return 0.5 * (hi - lo), 0.5 * (hi + lo)


@njit
def nb_step_scalars(u, v, ka, kb, F, speed, dtheta, hyperbolic, p, gamma, safety,
                    max_rel_change):
    shift = -1.0 if hyperbolic else 0.0
    f_min = np.inf
    z_max = -np.inf
    k_min = np.inf
    u_max = -np.inf
    cfl = np.inf
    change = np.inf
    for i in range(u.shape[0]):
        b1 = ka[i] + shift
        b2 = kb[i] + shift
        z = b1 * b1 + b2 * b2 - gamma * (b1 + b2) ** 2
        z_max = max(z_max, z)
        f_min = min(f_min, F[i])
        k_min = min(k_min, min(ka[i], kb[i]))
        u_max = max(u_max, u[i])
        vt = math.sinh(u[i]) if hyperbolic else u[i]
        cfl = min(cfl, (vt * dtheta) ** 2 * abs(F[i]) ** (p + 1.0) / (2.0 * p * v[i]))
        change = min(change, u[i] / speed[i])
    return f_min, z_max, k_min, u_max, safety * cfl, max_rel_change * change


if USE_NUMBA:
    axisym_field = nb_axisym_field
    flow_field = nb_flow_field
    midpoint_step = nb_midpoint_step
    radial_spread = nb_radial_spread
    step_scalars = nb_step_scalars
else:
    axisym_field = np_axisym_field
    flow_field = np_flow_field
    midpoint_step = np_midpoint_step
    radial_spread = np_radial_spread
    step_scalars = np_step_scalars
