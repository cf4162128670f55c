"""SVG figures of a conformal map: the domain with the preimage of a polar
grid, and the target disk or annulus with the boundary image.

Output is byte-deterministic for fixed inputs. Each drawn element carries a
``gid`` so that tests and downstream tools can locate it, and the document
description stores the affine transform from data coordinates to SVG user
units (see :func:`read_svg`).
"""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .conformal import ConformalMap  # noqa: E402
from .geometry import EXTERIOR_TARGETS, Region  # noqa: E402

CIRCLE_POINTS = 721
GRID_POINTS = 400


@dataclass(frozen=True)
class RenderSpec:
    radial: int = 10
    rays: int = 24
    show_poles: bool = True
    canvas: int = 480
    linewidth: float = 0.6
    boundary_color: str = "black"
    grid_color: str = "#3060c0"
    pole_color: str = "red"
    pole_size: float = 3.0

    def __post_init__(self):
        if self.radial < 1 or self.rays < 1:
            raise ValueError("grid counts must be at least 1")
        if self.canvas < 100:
            raise ValueError("canvas must be at least 100 px")


def parse_grid(text: str) -> tuple[int, int]:
    """``"R,T"`` -> ``(R, T)``."""
    try:
        r, t = (int(s) for s in text.split(","))
    except ValueError:
        raise ValueError(f"grid must look like R,T (got {text!r})") from None
    return r, t


def _circle(r, center=0j, n=CIRCLE_POINTS):
    return center + r * np.exp(2j * np.pi * np.arange(n) / (n - 1))


def _polar_grid(rho, exterior, spec: RenderSpec):
    """Circles and rays of the target grid as lists of complex polylines."""
    lo = 0.0 if rho is None else rho
    radii = np.linspace(lo, 1, spec.radial + 2)[1:-1]
    s = np.linspace(0, 1, GRID_POINTS)
    r_ray = lo + (1 - lo) * s
    if rho is None:
        r_ray = r_ray[1:]
    circles = [_circle(r, n=GRID_POINTS) for r in radii]
    rays = [r_ray * np.exp(2j * np.pi * k / spec.rays) for k in range(spec.rays)]
    lines = circles + rays
    if exterior:
        lines = [1.0 / np.conj(c) for c in lines]
    return lines


def _dense_chains(region, total=2048):
    """Closed polylines with every arc (segments included) finely sampled."""
    out = []
    for chain in region.chains:
        t = np.arange(max(256, total // len(chain))) / max(256, total // len(chain))
        z = np.concatenate([arc(t) for arc in chain])
        out.append(np.r_[z, z[:1]])
    return out


def _exterior_target(cmap):
    return cmap.target in ("int-ext", "ext-ext")


def _window(points, pad):
    lo = np.array([points.real.min(), points.imag.min()])
    hi = np.array([points.real.max(), points.imag.max()])
    size = np.max(hi - lo)
    mid = (lo + hi) / 2
    half = size / 2 * (1 + pad)
    return (mid[0] - half, mid[0] + half), (mid[1] - half, mid[1] + half)


def _in_window(z, xlim, ylim):
    return (z.real >= xlim[0]) & (z.real <= xlim[1]) & (z.imag >= ylim[0]) & (z.imag <= ylim[1])


def _clip(z, xlim, ylim):
    z = np.array(z, dtype=complex)
    z[~np.isfinite(z) | ~_in_window(z, xlim, ylim)] = np.nan
    return z


def _figure(spec: RenderSpec):
    inches = spec.canvas / 96.0
    fig = plt.figure(figsize=(inches, inches))
    ax = fig.add_axes((0.04, 0.04, 0.92, 0.92))
    ax.set_aspect("equal")
    ax.set_axis_off()
    return fig, ax


def _lines(ax, lines, gid, color, lw):
    for k, z in enumerate(lines):
        (ln,) = ax.plot(z.real, z.imag, color=color, lw=lw)
        ln.set_gid(f"{gid}-{k}")


def _dots(ax, z, gid, spec: RenderSpec):
    if z.size == 0:
        return
    (ln,) = ax.plot(z.real, z.imag, "o", ls="none", ms=spec.pole_size,
                    color=spec.pole_color, mec="none")
    ln.set_gid(gid)


def _save(fig, ax, path, xlim, ylim, title):
    ax.set_xlim(*xlim)
    ax.set_ylim(*ylim)
    fig.canvas.draw()
    # SVG user units are points; matplotlib writes y downward from the top
    height = fig.get_size_inches()[1] * 72.0
    to_pt = 72.0 / fig.dpi
    (x0, y0), (x1, y1) = ax.transData.transform([(xlim[0], ylim[0]), (xlim[1], ylim[1])])
    sx = (x1 - x0) / (xlim[1] - xlim[0]) * to_pt
    sy = (y1 - y0) / (ylim[1] - ylim[0]) * to_pt
    affine = {"sx": sx, "tx": x0 * to_pt - sx * xlim[0],
              "sy": -sy, "ty": height - (y0 * to_pt - sy * ylim[0])}
    desc = json.dumps({"title": title, "affine": affine,
                       "xlim": list(xlim), "ylim": list(ylim)}, sort_keys=True)
    with plt.rc_context({"svg.hashsalt": "confmap", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg",
                    metadata={"Date": None, "Title": title, "Description": desc})
    plt.close(fig)


def render_domain(cmap: ConformalMap, region: Region, path, spec: RenderSpec | None = None):
    """Domain-side figure: boundary, preimage of the target grid, forward poles."""
    spec = spec or RenderSpec()
    polys = region.polylines
    allpts = np.concatenate(polys)
    exterior_domain = region.target in EXTERIOR_TARGETS or region.connectivity == "disjoint_pair"
    xlim, ylim = _window(allpts, 1.0 if exterior_domain else 0.6)
    fig, ax = _figure(spec)
    grid = _polar_grid(cmap.modulus, _exterior_target(cmap), spec)
    with np.errstate(all="ignore"):
        pre = [_clip(cmap.inv(g), xlim, ylim) for g in grid]
    _lines(ax, pre, "grid-preimage", spec.grid_color, spec.linewidth * 0.7)
    _lines(ax, [np.r_[p, p[:1]] for p in polys], "domain-boundary", spec.boundary_color,
           spec.linewidth * 1.5)
    if spec.show_poles:
        p = cmap.forward_poles()
        _dots(ax, p[_in_window(p, xlim, ylim)], "forward-poles", spec)
    _save(fig, ax, path, xlim, ylim, "domain")


def render_target(cmap: ConformalMap, region: Region, path, spec: RenderSpec | None = None):
    """Target-side figure: unit circle, rho circle, boundary image, inverse poles."""
    spec = spec or RenderSpec()
    exterior = _exterior_target(cmap)
    extent = 2.5 if exterior else 1.0
    xlim = ylim = (-extent * 1.08, extent * 1.08)
    fig, ax = _figure(spec)
    grid = _polar_grid(cmap.modulus, exterior, spec)
    _lines(ax, [_clip(g, xlim, ylim) for g in grid], "grid", spec.grid_color,
           spec.linewidth * 0.5)
    (ln,) = ax.plot(*_xy(_circle(1.0)), color="0.5", lw=spec.linewidth * 2)
    ln.set_gid("target-outer")
    if cmap.modulus is not None:
        (ln,) = ax.plot(*_xy(_circle(cmap.modulus)), color="0.5", lw=spec.linewidth * 2)
        ln.set_gid("target-inner")
    with np.errstate(all="ignore"):
        img = [_clip(cmap(p), xlim, ylim) for p in _dense_chains(region)]
    _lines(ax, img, "boundary-image", spec.boundary_color, spec.linewidth)
    if spec.show_poles:
        p = cmap.inverse_poles()
        _dots(ax, p[_in_window(p, xlim, ylim)], "inverse-poles", spec)
    _save(fig, ax, path, xlim, ylim, "target")


def _xy(z):
    return z.real, z.imag


# ---------------------------------------------------------------------------
# reading figures back

_NUM = re.compile(r"-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?")


def read_svg(path) -> dict:
    """Map each ``gid`` prefix to the data-space points drawn under it.

    Polylines come from ``path`` elements; markers from ``use`` elements.
    """
    root = ET.parse(path).getroot()
    desc = None
    for el in root.iter():
        if el.tag.endswith("description") or el.tag.endswith("}desc"):
            for sub in el.iter():
                if sub.text and sub.text.strip().startswith("{"):
                    desc = json.loads(sub.text)
    if desc is None:
        raise ValueError(f"{path}: no coordinate description found")
    a = desc["affine"]
    out: dict[str, list] = {}
    for g in root.iter("{http://www.w3.org/2000/svg}g"):
        gid = g.get("id")
        if not gid:
            continue
        pts = []
        for el in g.iter():
            if el.tag.endswith("}path") and el.get("d"):
                nums = [float(v) for v in _NUM.findall(el.get("d"))]
                pts.extend(complex(x, y) for x, y in zip(nums[::2], nums[1::2]))
            elif el.tag.endswith("}use"):
                pts.append(complex(float(el.get("x")), float(el.get("y"))))
        if pts:
            p = np.array(pts)
            z = (p.real - a["tx"]) / a["sx"] + 1j * (p.imag - a["ty"]) / a["sy"]
            key = re.sub(r"-\d+$", "", gid)
            out.setdefault(key, []).append(z)
    return {k: np.concatenate(v) for k, v in out.items()}
