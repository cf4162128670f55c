"""Command-line front end.

::

    confmap map REGION.json [--tol T] [--method M] [--target T] [--out MAP.json] [--svg PREFIX]
    confmap eval MAP.json fwd|inv POINTS.txt [--out IMAGES.txt]
    confmap render MAP.json [--svg PREFIX] [--grid R,T] [--no-poles]
    confmap verify MAP.json [--n-test N] [--seed S]

Exit codes: 0 success, 2 bad input, 3 map computed but not converged.
The report goes to stdout between ``---`` delimiters; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .conformal import ConformalMap, MapOptions, conformal_map, verify_map
from .geometry import TARGETS, GeometryError, parse_region

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3

log = logging.getLogger("confmap")


class InputError(Exception):
    """Bad user input; reported on stderr with exit code 2."""


def _report(rows, out=None):
    out = out or sys.stdout
    print("---", file=out)
    for key, value in rows:
        print(f"{key}: {value}", file=out)
    print("---", file=out)


def _fmt(x):
    return "none" if x is None else f"{x:.10g}" if isinstance(x, float) else str(x)


def _read_json(path, what):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise InputError(f"{what}: cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{what}: {path} is not valid JSON ({e.msg} at line {e.lineno})") from None


def _load_map(path):
    d = _read_json(path, "map")
    try:
        return ConformalMap.from_dict(d)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"map: {path} is not a map artifact (field {e})") from None


def _region_of(cmap: ConformalMap):
    if cmap.region_spec is None:
        raise InputError("map: artifact has no region spec")
    target = None if cmap.target == "annulus" else cmap.target
    return parse_region(cmap.region_spec, target)


def _render(cmap, region, prefix, grid, show_poles=True):
    from .plotting import RenderSpec, render_domain, render_target

    spec = RenderSpec(radial=grid[0], rays=grid[1], show_poles=show_poles)
    paths = (Path(f"{prefix}-domain.svg"), Path(f"{prefix}-target.svg"))
    for p in paths:
        p.parent.mkdir(parents=True, exist_ok=True)
    render_domain(cmap, region, paths[0], spec)
    render_target(cmap, region, paths[1], spec)
    return paths


def _grid_arg(text):
    from .plotting import parse_grid

    try:
        r, t = parse_grid(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None
    if r < 1 or t < 1:
        raise argparse.ArgumentTypeError("grid counts must be at least 1")
    return r, t


# ---------------------------------------------------------------------------
# commands

def cmd_map(args) -> int:
    spec = _read_json(args.region, "region")
    region = parse_region(spec, args.target)
    try:
        opts = MapOptions(tol=args.tol, method=args.method.replace("-", "_"), target=args.target)
    except ValueError as e:
        raise InputError(f"--tol: {e}") from None
    t0 = time.perf_counter()
    cmap = conformal_map(region, opts)
    elapsed = time.perf_counter() - t0
    out = Path(args.out or Path(args.region).with_suffix(".map.json"))
    cmap.save(out)
    rows = [
        ("artifact", out),
        ("target", cmap.target),
        ("method", cmap.method),
        ("boundary_error", f"{cmap.boundary_error:.3e}"),
        ("degrees", f"{cmap.degrees[0]} {cmap.degrees[1]}"),
        ("rho", _fmt(cmap.modulus)),
        ("converged", str(cmap.converged).lower()),
        ("wall_time", f"{elapsed:.3f}s"),
    ]
    if "failure" in cmap.diagnostics:
        rows.append(("failure", cmap.diagnostics["failure"]))
    if args.svg:
        for p in _render(cmap, region, args.svg, args.grid):
            rows.append(("svg", p))
    _report(rows)
    if not cmap.converged:
        print(f"confmap: map did not converge: {cmap.diagnostics.get('failure', '')}",
              file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def read_points(path) -> np.ndarray:
    """One ``x y`` pair per line; blank lines and ``#`` comments are skipped."""
    pts = []
    try:
        fh = open(path)
    except OSError as e:
        raise InputError(f"points: cannot read {path}: {e.strerror}") from None
    with fh:
        for k, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if len(parts) != 2:
                    raise ValueError
                x, y = float(parts[0]), float(parts[1])
            except ValueError:
                raise InputError(f"points: line {k}: expected 'x y', got {line!r}") from None
            if not (np.isfinite(x) and np.isfinite(y)):
                raise InputError(f"points: line {k}: non-finite coordinate")
            pts.append(complex(x, y))
    return np.array(pts, dtype=complex)


def format_points(w) -> str:
    """Images in full precision; points mapped to a pole are written as ``inf inf``."""
    lines = []
    for v in w:
        if np.isfinite(v):
            lines.append(f"{float(v.real)!r} {float(v.imag)!r}")
        else:
            lines.append("inf inf")
    return "".join(s + "\n" for s in lines)


def cmd_eval(args) -> int:
    cmap = _load_map(args.map)
    z = read_points(args.points)
    t0 = time.perf_counter()
    with np.errstate(all="ignore"):
        w = cmap(z) if args.direction == "fwd" else cmap.inv(z)
    elapsed = time.perf_counter() - t0
    text = format_points(w)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    rate = z.size / elapsed if elapsed > 0 and z.size else 0.0
    rows = [("points", z.size), ("direction", args.direction),
            ("poles_hit", int(np.sum(~np.isfinite(w)))),
            ("eval_time", f"{elapsed:.4f}s"), ("throughput", f"{rate:.0f} points/s")]
    # keep stdout clean for the images when they go there
    _report(rows, sys.stdout if args.out else sys.stderr)
    return EXIT_OK


def cmd_render(args) -> int:
    cmap = _load_map(args.map)
    region = _region_of(cmap)
    prefix = args.svg or str(Path(args.map).with_suffix(""))
    paths = _render(cmap, region, prefix, args.grid, not args.no_poles)
    _report([("svg", p) for p in paths])
    return EXIT_OK


def cmd_verify(args) -> int:
    cmap = _load_map(args.map)
    region = _region_of(cmap)
    rep = verify_map(cmap, region, n_test=args.n_test, seed=args.seed)
    print("---")
    for line in rep.lines():
        print(line)
    print("---")
    return EXIT_OK if rep.ok else EXIT_NOT_CONVERGED


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="confmap", description="Numerical conformal maps "
                                "onto disks and annuli via lightning solves and AAA compression.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("map", help="compute a map from a region spec")
    m.add_argument("region", help="region spec (JSON)")
    m.add_argument("--tol", type=float, default=1e-6)
    m.add_argument("--method", default="auto",
                   choices=["auto", "polynomial", "lightning", "corner-basis"])
    m.add_argument("--target", choices=list(TARGETS), default=None)
    m.add_argument("--out", help="artifact path (default REGION.map.json)")
    m.add_argument("--svg", metavar="PREFIX", help="also render PREFIX-domain.svg and PREFIX-target.svg")
    m.add_argument("--grid", type=_grid_arg, default=(10, 24), metavar="R,T")
    m.set_defaults(func=cmd_map)

    e = sub.add_parser("eval", help="evaluate a map on a points file")
    e.add_argument("map")
    e.add_argument("direction", choices=["fwd", "inv"])
    e.add_argument("points", help="text file, one 'x y' pair per line")
    e.add_argument("--out", help="output file (default stdout)")
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("render", help="draw SVG figures of a map")
    r.add_argument("map")
    r.add_argument("--svg", metavar="PREFIX")
    r.add_argument("--grid", type=_grid_arg, default=(10, 24), metavar="R,T")
    r.add_argument("--no-poles", action="store_true")
    r.set_defaults(func=cmd_render)

    v = sub.add_parser("verify", help="audit a map artifact")
    v.add_argument("map")
    v.add_argument("--n-test", type=int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (InputError, GeometryError) as e:
        print(f"confmap: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
