"""Command-line interface: ``pinchflow {run,reference,counterexample,sweep}``.

Exit codes: 0 completed, 1 I/O error, 2 pinching violated, 3 convexity lost,
4 speed degenerate or stiff, 5 configuration error.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .counterexample import (
    QuarticPatch,
    h11_dot_closed_form,
    h11_dot_numeric,
    patch_flow_short_time,
)
from .errors import ConfigError, PinchflowError
from .flow import run as run_flow
from .flow import with_overrides
from .geometry import Ambient
from .io import (
    EXIT_CODES,
    EXIT_CONFIG_ERROR,
    EXIT_IO_ERROR,
    RunManifest,
    config_to_dict,
    emit_series,
    emit_snapshot,
    emit_svg,
    emit_table,
    fitted_exponents,
    parse_config,
)
from .reference import SphereSolution

log = logging.getLogger("pinchflow")


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def execute(cfg, out_dir):
    """Run one config and write every artifact into ``out_dir``; returns the exit code."""
    out = Path(out_dir)
    manifest = RunManifest(config=config_to_dict(cfg), version=__version__, started=_now())
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        log.error("cannot create output directory %s: %s", out, exc)
        return EXIT_IO_ERROR
    try:
        result = run_flow(cfg)
        manifest.stop_reason = result.stop_reason
        manifest.steps = result.steps
        manifest.blowup_estimate = result.blowup_estimate
        manifest.message = result.message
        manifest.exit_code = EXIT_CODES[result.stop_reason]
        manifest.exponents = fitted_exponents(result)
        emit_series(result.series, out / "series.csv")
        emit_snapshot(result.snapshots[0], out / "snapshot_initial.csv")
        emit_snapshot(result.final, out / "snapshot_final.csv")
        emit_svg(result.series, out / "summary.svg")
    except OSError as exc:
        manifest.stop_reason, manifest.message = "io_error", str(exc)
        manifest.exit_code = EXIT_IO_ERROR
    except PinchflowError as exc:
        manifest.stop_reason, manifest.message = "error", str(exc)
        manifest.exit_code = EXIT_CODES["stiffness"]
    finally:
        manifest.finished = _now()
        try:
            manifest.write(out / "manifest.json")
        except OSError as exc:
            log.error("cannot write manifest: %s", exc)
            manifest.exit_code = EXIT_IO_ERROR
    log.info("%s: %s after %d steps", out, manifest.stop_reason, manifest.steps)
    return manifest.exit_code


def _load(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def cmd_run(args):
    try:
        cfg = _load(args.config)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG_ERROR
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO_ERROR
    return execute(cfg, args.out or cfg.output.dir)


def cmd_reference(args):
    try:
        sol = SphereSolution(Ambient.parse(args.ambient), args.r0, args.n, args.p)
        table = sol.table(args.t_end, args.samples)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG_ERROR
    sys.stdout.write(emit_table(("t", "Theta"), table))
    return 0


def cmd_counterexample(args):
    try:
        patch = QuarticPatch(args.a2, args.b2)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG_ERROR
    closed = h11_dot_closed_form(args.a2, args.b2, args.p)
    if not args.numeric:
        sys.stdout.write(emit_table(("a2", "b2", "p", "h11_dot"),
                                    [(args.a2, args.b2, args.p, closed)]))
        print(f"h11_dot closed_form={closed:.17g}", file=sys.stderr)
        return 0
    try:
        numeric = h11_dot_numeric(patch, args.p)
        res = patch_flow_short_time(patch, args.p)
    except PinchflowError as exc:
        log.error("%s", exc)
        return EXIT_CODES["speed_degenerate"]
    sys.stdout.write(emit_table(("t", "h11"), zip(res.t, res.h11)))
    print(f"h11_dot closed_form={closed:.17g} numeric={numeric:.17g} "
          f"flow_slope={res.initial_slope:.17g} sign_change={res.changed_sign}",
          file=sys.stderr)
    return 0


def _sweep_one(job):
    path, out_dir = job
    logging.basicConfig(level=logging.WARNING)
    try:
        cfg = _load(path)
    except ConfigError as exc:
        return path, EXIT_CONFIG_ERROR, str(exc)
    except OSError as exc:
        return path, EXIT_IO_ERROR, str(exc)
    cfg = with_overrides(cfg, output={"dir": str(out_dir)})
    return path, execute(cfg, out_dir), ""


def cmd_sweep(args):
    root = Path(args.directory)
    configs = sorted(root.glob("*.json"))
    if not configs:
        log.error("no *.json configs in %s", root)
        return EXIT_CONFIG_ERROR
    out_root = Path(args.out) if args.out else root / "runs"
    jobs = [(str(c), str(out_root / c.stem)) for c in configs]
    workers = args.jobs or os.cpu_count() or 1
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_sweep_one, jobs))
    worst = 0
    for path, code, msg in results:
        print(f"{path}\t{code}\t{msg}")
        worst = max(worst, code)
    return worst


def build_parser():
    ap = argparse.ArgumentParser(prog="pinchflow", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="integrate one JSON config")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides output.dir)")
    r.set_defaults(func=cmd_run)

    ref = sub.add_parser("reference", help="radius of a centred sphere as CSV")
    ref.add_argument("--ambient", default="euclidean", choices=[a.value for a in Ambient])
    ref.add_argument("--r0", type=float, default=1.0)
    ref.add_argument("--n", type=int, default=2)
    ref.add_argument("--p", type=float, default=2.0)
    ref.add_argument("--t-end", type=float, required=True)
    ref.add_argument("--samples", type=int, default=101)
    ref.set_defaults(func=cmd_reference)

    ce = sub.add_parser("counterexample", help="rate of h11 at the flat point")
    ce.add_argument("--a2", type=float, default=1.0)
    ce.add_argument("--b2", type=float, default=2.0)
    ce.add_argument("--p", type=float, default=2.0)
    ce.add_argument("--numeric", action="store_true",
                    help="also evaluate the evolution equation and flow the patch")
    ce.set_defaults(func=cmd_counterexample)

    sw = sub.add_parser("sweep", help="run every *.json config in a directory")
    sw.add_argument("directory")
    sw.add_argument("--out", help="root for per-config output directories")
    sw.add_argument("--jobs", type=int, default=None)
    sw.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
