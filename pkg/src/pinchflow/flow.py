"""Time integration of the radial graph equation ``du/dt = v / F^p``.

The scheme is the explicit midpoint rule.  Each step uses

    dt = min(dt_cfl, dt_change)

where ``dt_cfl`` is a diffusive stability bound for the linearised operator
and ``dt_change`` caps the relative change of ``u`` in one step.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .curvature import CurvatureFunction
from .diagnostics import (
    N_DIM,
    PinchingConfig,
    make_record,
    rescaled,
    series_column,
    validate_initial_pinching,
)
from .errors import ConfigError, FitError, SpeedDegeneracyError, StiffnessError
from .geometry import Ambient, AxisymGrid, CurvatureField, GraphState, phi_from_u
from .reference import euclid_blowup

log = logging.getLogger(__name__)

STOP_REASONS = ("t_end", "u_max_stop", "pinching_violated", "nonconvex",
                "speed_degenerate", "stiffness")


@dataclass(frozen=True)
class InitialProfile:
    """``u0(theta) = r0 (1 + eps cos(k theta))``; a sphere has ``eps = 0``."""

    kind: str = "sphere"
    r0: float = 1.0
    eps: float = 0.0
    k: int = 0

    def __post_init__(self):
        if self.kind not in ("sphere", "perturbed"):
            raise ConfigError(f"unknown profile kind {self.kind!r}", "initial.kind")
        if not self.r0 > 0:
            raise ConfigError("r0 must be positive", "initial.r0")
        if not abs(self.eps) < 1:
            raise ConfigError("|eps| < 1 is needed for a positive profile", "initial.eps")
        if int(self.k) != self.k or self.k < 0:
            raise ConfigError("k must be a non-negative integer", "initial.k")

    @classmethod
    def sphere(cls, r0):
        return cls("sphere", r0)

    @classmethod
    def perturbed(cls, r0, eps, k):
        return cls("perturbed", r0, eps, k)

    def __call__(self, theta):
        if self.kind == "sphere":
            return np.full_like(theta, self.r0)
        return self.r0 * (1.0 + self.eps * np.cos(self.k * theta))


@dataclass(frozen=True)
class StepperConfig:
    safety: float = 0.2
    max_rel_change: float = 1e-3


@dataclass(frozen=True)
class StopConfig:
    t_end: float = None
    u_max_stop: float = None
    halt_on_pinching_violation: bool = True
    halt_on_nonconvex: bool = True


@dataclass(frozen=True)
class OutputConfig:
    every_n_steps: int = 10
    dir: str = "out"


@dataclass(frozen=True)
class FlowConfig:
    ambient: Ambient = Ambient.EUCLIDEAN
    p: float = 2.0
    f: CurvatureFunction = field(default_factory=lambda: CurvatureFunction.mean(N_DIM))
    n_theta: int = 64
    initial: InitialProfile = field(default_factory=InitialProfile)
    c0: float = 0.1
    stepper: StepperConfig = field(default_factory=StepperConfig)
    stop: StopConfig = field(default_factory=StopConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    validate_initial: bool = True

    def __post_init__(self):
        if not self.p > 1:
            raise ConfigError("the exponent must satisfy 1 < p < inf", "p")
        if not np.isfinite(self.p):
            raise ConfigError("the exponent must be finite", "p")
        try:
            PinchingConfig(self.c0, N_DIM)
        except ValueError as exc:
            raise ConfigError(str(exc), "c0") from None
        if self.f.n != N_DIM:
            raise ConfigError("only n = 2 is supported", "F")
        if int(self.n_theta) != self.n_theta or self.n_theta < 16:
            raise ConfigError("n_theta must be an integer >= 16", "n_theta")
        for name in ("safety", "max_rel_change"):
            if not getattr(self.stepper, name) > 0:
                raise ConfigError("must be positive", f"stepper.{name}")
        for name in ("t_end", "u_max_stop"):
            val = getattr(self.stop, name)
            if val is not None and not val > 0:
                raise ConfigError("must be positive", f"stop.{name}")
        if self.stop.t_end is None and self.stop.u_max_stop is None:
            raise ConfigError("at least one of t_end, u_max_stop is required", "stop")
        if not (int(self.output.every_n_steps) == self.output.every_n_steps
                and self.output.every_n_steps > 0):
            raise ConfigError("must be a positive integer", "output.every_n_steps")

    @property
    def pinching(self):
        return PinchingConfig(self.c0, N_DIM)

    @property
    def grid(self):
        return AxisymGrid(self.n_theta)

    def initial_state(self):
        g = self.grid
        return GraphState(self.ambient, g, self.initial(g.theta), 0.0)


@dataclass
class FlowResult:
    config: FlowConfig
    series: list
    snapshots: list
    stop_reason: str
    steps: int = 0
    blowup_estimate: float = None
    message: str = ""

    def column(self, name):
        return series_column(self.series, name)

    @property
    def final(self):
        return self.snapshots[-1]


# ---------------------------------------------------------------------------
# single steps
# ---------------------------------------------------------------------------

def _field(state, cfg):
    g = state.grid
    return kernels.flow_field(state.u, g.theta, g.d_theta, state.ambient.hyperbolic,
                              cfg.f.kernel_code, float(cfg.p))


def _curvature_field(state, raw):
    v, ka, kb, F, _ = raw
    return CurvatureField(v=v, kappa1=np.minimum(ka, kb), kappa2=np.maximum(ka, kb),
                          F=F, phi=phi_from_u(state))


def _scalars(state, raw, cfg):
    v, ka, kb, F, speed = raw
    return kernels.step_scalars(state.u, v, ka, kb, F, speed, state.grid.d_theta,
                                state.ambient.hyperbolic, float(cfg.p),
                                cfg.pinching.gamma, cfg.stepper.safety,
                                cfg.stepper.max_rel_change)


def _t_scale(state, cfg):
    if state.ambient.hyperbolic:
        return max(1.0, state.t)
    return max(state.t, euclid_blowup(float(state.u.min()), N_DIM, cfg.p))


def _advance(state, raw, dt, cfg):
    g = state.grid
    u_new, ok = kernels.midpoint_step(state.u, raw[4], g.theta, g.d_theta,
                                      state.ambient.hyperbolic, cfg.f.kernel_code,
                                      float(cfg.p), dt)
    if not ok:
        raise SpeedDegeneracyError(f"speed function degenerates at t={state.t + 0.5 * dt}")
    return state.evolved(u_new, state.t + dt)


def step(state, cfg, dt_max=np.inf):
    """One midpoint step with the adaptive time step.

    Returns ``(new_state, dt_used, field)`` where ``field`` is the curvature
    field of the *input* state.
    """
    raw = _field(state, cfg)
    f_min, _, _, _, dt_cfl, dt_change = _scalars(state, raw, cfg)
    if not f_min > 0:
        idx = int(np.argmin(np.where(np.isnan(raw[3]), -np.inf, raw[3])))
        raise SpeedDegeneracyError(f"F <= 0 at node {idx}", index=idx)
    dt = min(dt_cfl, dt_change, dt_max)
    if not dt >= 1e-14 * _t_scale(state, cfg):
        raise StiffnessError(f"time step {dt} underflowed at t={state.t}")
    return _advance(state, raw, dt, cfg), dt, _curvature_field(state, raw)


def advance_to(state, cfg, t_target):
    """Step until exactly ``t_target`` (the last step is clipped)."""
    while state.t < t_target:
        state, _, _ = step(state, cfg, dt_max=t_target - state.t)
        if t_target - state.t < 1e-15 * max(1.0, t_target):
            state = state.evolved(state.u, t_target)
    return state


# ---------------------------------------------------------------------------
# blow-up estimate and rescaling
# ---------------------------------------------------------------------------

def estimate_blowup(t, radius, p, n=N_DIM, tail=0.5, min_records=10):
    """Blow-up time from a straight-line fit of ``radius^(1-p)`` against ``t``.

    For spheres ``u^(1-p) = r0^(1-p) - (p-1) t / n^p`` exactly; the fit uses
    the trailing ``tail`` fraction of the records so that the early transient
    of a perturbed surface does not bias the root.  Any radius series works
    (``u_min`` for instance); :func:`finalize_series` passes the mid-range
    ``(u_min + u_max) / 2``, which is exact for translated spheres too.
    """
    t = np.asarray(t, dtype=float)
    radius = np.asarray(radius, dtype=float)
    if t.size < min_records:
        raise FitError(f"need at least {min_records} records, got {t.size}")
    if np.any(np.diff(radius) <= 0):
        raise FitError("the radius must increase strictly for a blow-up fit")
    start = min(int(np.floor((1.0 - tail) * t.size)), t.size - min_records)
    y = radius[start:] ** (1.0 - p)
    slope, intercept = np.polyfit(t[start:], y, 1)
    if not slope < 0:
        raise FitError("fitted line does not decrease")
    return float(-intercept / slope)


def rescaling_radius(t, blowup, p, n=N_DIM):
    """``Theta(t) = ((p-1)/n^p (T* - t))^(-1/(p-1))``."""
    return ((p - 1.0) / n ** p * (blowup - np.asarray(t, dtype=float))) ** (-1.0 / (p - 1.0))


def finalize_series(records, cfg):
    """Fill the reference radius and rescaled columns; return the blow-up estimate."""
    n_p = N_DIM ** cfg.p
    if cfg.ambient.hyperbolic:
        return [rescaled(r, cfg.ambient, r.t / n_p) for r in records], None
    t = series_column(records, "t")
    try:
        mid = 0.5 * (series_column(records, "u_min") + series_column(records, "u_max"))
        T = estimate_blowup(t, mid, cfg.p)
    except FitError as exc:
        log.info("no blow-up estimate: %s", exc)
        return records, None
    theta = rescaling_radius(t, T, cfg.p)
    return [rescaled(r, cfg.ambient, float(th)) for r, th in zip(records, theta)], T


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------

def _stop_reason(state, scalars, cfg):
    _, z_max, k_min, u_max, _, _ = scalars
    if cfg.stop.halt_on_pinching_violation and not z_max < 0:
        return "pinching_violated"
    if cfg.stop.halt_on_nonconvex and not k_min > 0:
        return "nonconvex"
    if cfg.stop.u_max_stop is not None and u_max >= cfg.stop.u_max_stop:
        return "u_max_stop"
    if cfg.stop.t_end is not None and state.t >= cfg.stop.t_end:
        return "t_end"
    return None


def run(cfg, max_steps=50_000_000):
    """Integrate until a stop condition fires.

    Records (and snapshots) are taken at the initial state, every
    ``cfg.output.every_n_steps`` steps and at the final state.
    """
    state = cfg.initial_state()
    pcfg = cfg.pinching
    records, snapshots = [], []

    def emit(st, raw, dt):
        records.append(make_record(st, _curvature_field(st, raw), dt, pcfg))
        snapshots.append(st)

    if cfg.validate_initial:
        check = validate_initial_pinching(state, pcfg, cfg.f)
        if not check.passed:
            raw = _field(state, cfg)
            emit(state, raw, 0.0)
            return FlowResult(cfg, records, snapshots, "pinching_violated", 0,
                              message=f"initial pinching fails at node {check.worst_node} "
                                      f"(z={check.z_max:.3e}, kappa_min={check.kappa_min:.3e})")

    every = cfg.output.every_n_steps
    t_end = np.inf if cfg.stop.t_end is None else cfg.stop.t_end
    n_steps, last_dt, message = 0, 0.0, ""
    while True:
        raw = _field(state, cfg)
        scalars = _scalars(state, raw, cfg)
        f_min, _, _, _, dt_cfl, dt_change = scalars
        if not f_min > 0:
            reason, message = "speed_degenerate", f"F <= 0 at t={state.t}"
        else:
            reason = _stop_reason(state, scalars, cfg)
        if reason is None and n_steps >= max_steps:
            reason, message = "stiffness", f"step budget {max_steps} exhausted"
        dt = min(dt_cfl, dt_change, t_end - state.t)
        if reason is None and not dt >= 1e-14 * _t_scale(state, cfg):
            reason, message = "stiffness", f"time step {dt} underflowed at t={state.t}"
        if reason is None:
            try:
                new = _advance(state, raw, dt, cfg)
            except SpeedDegeneracyError as exc:
                reason, message = "speed_degenerate", str(exc)
        if reason is not None or n_steps % every == 0:
            emit(state, raw, last_dt)
        if reason is not None:
            break
        if t_end - new.t < 1e-15 * max(1.0, t_end):
            new = new.evolved(new.u, t_end)
        state, last_dt = new, dt
        n_steps += 1

    series, T = finalize_series(records, cfg)
    return FlowResult(cfg, series, snapshots, reason, n_steps, T, message)


def with_overrides(cfg, **changes):
    """Shallow ``dataclasses.replace`` that also accepts nested section dicts."""
    for name in ("stepper", "stop", "output", "initial"):
        if isinstance(changes.get(name), dict):
            changes[name] = replace(getattr(cfg, name), **changes[name])
    return replace(cfg, **changes)
