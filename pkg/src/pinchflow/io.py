"""Configuration parsing and output sinks (CSV series, snapshots, SVG, manifest).

Data files contain no timestamps, so identical configs give byte-identical
CSV output.  Timestamps only appear in the run manifest.
"""

import csv
import io as _io
import json
import math
from dataclasses import asdict, dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .curvature import CurvatureFunction, MEAN_H, ROOT_HK
from .diagnostics import (
    N_DIM,
    SERIES_COLUMNS,
    curvature_deviation,
    fit_decay_rate,
    hausdorff_decay_exponent,
)
from .errors import ConfigError, FitError
from .flow import FlowConfig, InitialProfile, OutputConfig, StepperConfig, StopConfig
from .geometry import Ambient

EXIT_CODES = {
    "t_end": 0,
    "u_max_stop": 0,
    "pinching_violated": 2,
    "nonconvex": 3,
    "speed_degenerate": 4,
    "stiffness": 4,
}
EXIT_CONFIG_ERROR = 5
EXIT_IO_ERROR = 1

_FMT = "%.17g"


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

class _Reader:
    """Strict accessor for one JSON object: tracks which keys were consumed."""

    def __init__(self, obj, path):
        if not isinstance(obj, dict):
            raise ConfigError("expected a JSON object", path or "$")
        self.obj = obj
        self.path = path
        self.used = set()

    def _p(self, key):
        return f"{self.path}.{key}" if self.path else key

    def get(self, key, kind, default=..., nullable=False):
        self.used.add(key)
        if key not in self.obj:
            if default is ...:
                raise ConfigError("missing required field", self._p(key))
            return default
        val = self.obj[key]
        if val is None and nullable:
            return None
        if kind is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"expected a number, got {val!r}", self._p(key))
            if not math.isfinite(val):
                raise ConfigError("must be finite", self._p(key))
            return float(val)
        if kind is int:
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"expected an integer, got {val!r}", self._p(key))
            return val
        if not isinstance(val, kind):
            raise ConfigError(f"expected {kind.__name__}, got {val!r}", self._p(key))
        return val

    def sub(self, key, required=False):
        self.used.add(key)
        if key not in self.obj:
            if required:
                raise ConfigError("missing required field", self._p(key))
            return _Reader({}, self._p(key))
        return _Reader(self.obj[key], self._p(key))

    def finish(self):
        extra = sorted(set(self.obj) - self.used)
        if extra:
            raise ConfigError("unknown key", self._p(extra[0]))


def config_from_dict(obj):
    """Build a validated :class:`FlowConfig` from a decoded JSON object."""
    top = _Reader(obj, "")
    try:
        ambient = Ambient.parse(top.get("ambient", str))
    except ValueError as exc:
        raise ConfigError(str(exc), "ambient") from None
    p = top.get("p", float)
    if not p > 1:
        raise ConfigError("the exponent must satisfy 1 < p < inf", "p")

    fr = top.sub("F")
    kind = fr.get("kind", str, MEAN_H)
    if kind == ROOT_HK:
        k = fr.get("k", int)
    else:
        k = fr.get("k", int, 1)
    fr.finish()
    try:
        f = CurvatureFunction(kind, N_DIM, k)
    except ValueError as exc:
        raise ConfigError(str(exc), "F") from None

    ir = top.sub("initial", required=True)
    ikind = ir.get("kind", str)
    if ikind == "sphere":
        initial = InitialProfile.sphere(ir.get("r0", float))
    elif ikind == "perturbed":
        initial = InitialProfile.perturbed(ir.get("r0", float), ir.get("eps", float),
                                           ir.get("k", int))
    else:
        raise ConfigError(f"unknown profile kind {ikind!r}", "initial.kind")
    ir.finish()

    d_step, d_stop, d_out = StepperConfig(), StopConfig(), OutputConfig()
    sr = top.sub("stepper")
    stepper = StepperConfig(sr.get("safety", float, d_step.safety),
                            sr.get("max_rel_change", float, d_step.max_rel_change))
    sr.finish()
    tr = top.sub("stop")
    stop = StopConfig(
        tr.get("t_end", float, None, nullable=True),
        tr.get("u_max_stop", float, None, nullable=True),
        tr.get("halt_on_pinching_violation", bool, d_stop.halt_on_pinching_violation),
        tr.get("halt_on_nonconvex", bool, d_stop.halt_on_nonconvex),
    )
    tr.finish()
    orr = top.sub("output")
    output = OutputConfig(orr.get("every_n_steps", int, d_out.every_n_steps),
                          orr.get("dir", str, d_out.dir))
    orr.finish()

    c0 = top.get("c0", float, 0.1)
    hi = 1.0 / (N_DIM * (N_DIM - 1))
    if not 0.0 < c0 < hi:
        raise ConfigError(f"c0 must lie in (0, {hi:g}) for n = {N_DIM}", "c0")
    cfg = FlowConfig(
        ambient=ambient,
        p=p,
        f=f,
        n_theta=top.get("n_theta", int, 64),
        initial=initial,
        c0=c0,
        stepper=stepper,
        stop=stop,
        output=output,
        validate_initial=top.get("validate_initial", bool, True),
    )
    top.finish()
    return cfg


def parse_config(text):
    """Parse strict JSON text into a :class:`FlowConfig`."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    return config_from_dict(obj)


def config_to_dict(cfg):
    """Canonical JSON-ready form with every default filled in."""
    init = {"kind": cfg.initial.kind, "r0": cfg.initial.r0}
    if cfg.initial.kind == "perturbed":
        init.update(eps=cfg.initial.eps, k=int(cfg.initial.k))
    f = {"kind": cfg.f.kind}
    if cfg.f.kind == ROOT_HK:
        f["k"] = cfg.f.k
    return {
        "ambient": cfg.ambient.value,
        "p": float(cfg.p),
        "F": f,
        "n_theta": int(cfg.n_theta),
        "initial": init,
        "c0": float(cfg.c0),
        "stepper": asdict(cfg.stepper),
        "stop": asdict(cfg.stop),
        "output": asdict(cfg.output),
        "validate_initial": cfg.validate_initial,
    }


def serialize_config(cfg):
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# CSV sinks
# ---------------------------------------------------------------------------

def _fmt(x):
    return _FMT % x


def emit_series(records, out=None):
    """Write the diagnostics series as CSV; returns the text if ``out`` is None."""
    if not records:
        raise ValueError("empty series")
    lines = [",".join(SERIES_COLUMNS)]
    for r in records:
        lines.append(",".join(_fmt(getattr(r, c)) for c in SERIES_COLUMNS))
    text = "\n".join(lines) + "\n"
    if out is None:
        return text
    with open(out, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
    return text


def emit_table(header, rows, out=None):
    """Generic ``%.17g`` CSV for numeric rows."""
    lines = [",".join(header)]
    lines += [",".join(_fmt(x) for x in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if out is not None:
        with open(out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    return text


def emit_snapshot(state, out=None):
    """``theta,u`` rows of one graph state."""
    if state.u.size == 0:
        raise ValueError("empty snapshot")
    return emit_table(("theta", "u"), zip(state.grid.theta, state.u), out)


def parse_snapshot(text):
    """Inverse of :func:`emit_snapshot`: returns ``(theta, u)`` arrays."""
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or rows[0] != ["theta", "u"]:
        raise ValueError("snapshot header must be 'theta,u'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    return data[:, 0], data[:, 1]


def parse_series(text):
    """Read a series CSV back into a dict of column arrays."""
    rows = list(csv.reader(_io.StringIO(text)))
    if tuple(rows[0]) != SERIES_COLUMNS:
        raise ValueError("unexpected series header")
    data = np.array([[float(x) for x in row] for row in rows[1:]])
    return {c: data[:, i] for i, c in enumerate(SERIES_COLUMNS)}


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

def _svg_panel(x, y, x0, y0, w, h, title, xlabel, ylabel, logx):
    ok = np.isfinite(x) & np.isfinite(y) & (y > 0) & ((x > 0) | (not logx))
    parts = [f'<g><rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="black"/>',
             f'<text x="{x0 + w / 2}" y="{y0 - 8}" text-anchor="middle">{escape(title)}</text>',
             f'<text class="xlabel" x="{x0 + w / 2}" y="{y0 + h + 32}" '
             f'text-anchor="middle">{escape(xlabel)}</text>',
             f'<text class="ylabel" x="{x0 - 40}" y="{y0 + h / 2}" text-anchor="middle" '
             f'transform="rotate(-90 {x0 - 40} {y0 + h / 2})">{escape(ylabel)}</text>']
    if ok.sum() >= 2:
        xs = np.log10(x[ok]) if logx else x[ok]
        ys = np.log10(y[ok])
        xlo, xhi = xs.min(), xs.max()
        ylo, yhi = ys.min(), ys.max()
        xhi = xhi if xhi > xlo else xlo + 1.0
        yhi = yhi if yhi > ylo else ylo + 1.0
        px = x0 + (xs - xlo) / (xhi - xlo) * w
        py = y0 + h - (ys - ylo) / (yhi - ylo) * h
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="steelblue"/>')
        xt = (lambda v: f"1e{v:.1f}") if logx else (lambda v: f"{v:.3g}")
        parts.append(f'<text x="{x0}" y="{y0 + h + 15}" font-size="10">{xt(xlo)}</text>')
        parts.append(f'<text x="{x0 + w}" y="{y0 + h + 15}" font-size="10" '
                     f'text-anchor="end">{xt(xhi)}</text>')
        parts.append(f'<text x="{x0 - 4}" y="{y0 + h}" font-size="10" '
                     f'text-anchor="end">1e{ylo:.1f}</text>')
        parts.append(f'<text x="{x0 - 4}" y="{y0 + 10}" font-size="10" '
                     f'text-anchor="end">1e{yhi:.1f}</text>')
    parts.append("</g>")
    return "\n".join(parts)


def emit_svg(records, out=None):
    """Two log-scale panels: distance to the best sphere and curvature deviation."""
    if not records:
        raise ValueError("empty series")
    R = np.array([r.theta_ref for r in records], dtype=float)
    dist = np.array([r.dist_sphere for r in records], dtype=float)
    t = np.array([r.t for r in records], dtype=float)
    dev = curvature_deviation(records)
    body = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" width="900" height="400" '
        'font-family="sans-serif" font-size="12">',
        _svg_panel(R, dist, 80, 40, 320, 300, "distance to best-fit sphere",
                   "reference radius (log)", "dist_sphere (log)", True),
        _svg_panel(t, dev, 540, 40, 320, 300, "curvature deviation",
                   "t", "max |kappa - 1| (log)", False),
        "</svg>",
    ]
    text = "\n".join(body) + "\n"
    if out is not None:
        with open(out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------

def fitted_exponents(result):
    """Decay rates and the Hausdorff slope that make sense for this run."""
    out = {"lambda_curv": None, "lambda_grad": None, "hausdorff_slope": None}
    series = result.series
    if len(series) < 2:
        return out
    t = result.column("t")
    try:
        if result.config.ambient.hyperbolic:
            out["lambda_curv"] = fit_decay_rate(t, curvature_deviation(series))
            out["lambda_grad"] = fit_decay_rate(t, result.column("v_max") - 1.0)
        else:
            out["hausdorff_slope"] = hausdorff_decay_exponent(result.column("theta_ref"),
                                                              result.column("dist_sphere"))
    except FitError:
        pass
    return out


@dataclass
class RunManifest:
    config: dict
    version: str
    started: str
    finished: str = None
    stop_reason: str = None
    exit_code: int = None
    steps: int = 0
    blowup_estimate: float = None
    exponents: dict = field(default_factory=dict)
    message: str = ""

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def write(self, path):
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(self.to_json())
