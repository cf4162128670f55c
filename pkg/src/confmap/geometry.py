"""Oriented boundary curves, regions, and collocation sampling.

A region is stored as one or two closed chains of arcs. Every chain is
oriented so that its traversal matches the conventions below, and each
chain records on which side of the travel direction the domain lies:

* simply connected, interior target: one counterclockwise chain, domain left
* simply connected, exterior target: one counterclockwise chain, domain right
* annular: outer chain counterclockwise and inner chain clockwise, domain left
* disjoint pair: two counterclockwise chains, domain right of both
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

SEGMENT = "segment"
CIRCULAR = "circular"
PARAMETRIC = "parametric"

TARGETS = ("disk", "int-ext", "ext-ext", "ext-disk", "annulus")
EXTERIOR_TARGETS = ("ext-ext", "ext-disk")

# turning angle below which two arcs are considered to join smoothly
_SMOOTH_TURN = 1e-6


class GeometryError(ValueError):
    """Raised for malformed or unsupported region descriptions."""


class TrigCurve:
    """Closed curve given by equispaced samples, resampled by trigonometric
    interpolation on ``t in [0, 1)``."""

    def __init__(self, points):
        pts = np.asarray(points, dtype=complex).ravel()
        if pts.size < 3:
            raise GeometryError("smooth curve needs at least 3 points")
        if not np.all(np.isfinite(pts)):
            raise GeometryError("smooth curve points must be finite")
        if abs(pts[0] - pts[-1]) < 1e-14 * max(1.0, np.abs(pts).max()):
            pts = pts[:-1]
        self.points = pts
        N = pts.size
        c = np.fft.fft(pts) / N
        k = np.fft.fftfreq(N, 1.0 / N)
        if N % 2 == 0:
            # split the Nyquist mode symmetrically
            nyq = N // 2
            c = np.append(c, 0.5 * c[nyq])
            c[nyq] *= 0.5
            k = np.append(k, float(nyq))
            k[nyq] = -nyq
        self._coef = c
        self._freq = 2j * np.pi * k

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(np.multiply.outer(t, self._freq)) @ self._coef

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(np.multiply.outer(t, self._freq)) @ (self._freq * self._coef)

    @cached_property
    def _arclength_table(self):
        n = max(4096, 16 * self.points.size)
        t = np.arange(n + 1) / n
        speed = np.abs(self.derivative(t))
        s = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) / n)])
        return t, s

    @property
    def length(self) -> float:
        return float(self._arclength_table[1][-1])

    def param_at_arclength(self, s):
        t, table = self._arclength_table
        return np.interp(s, table, t)


@dataclass(frozen=True)
class Arc:
    """One boundary piece, parameterised over ``t in [0, 1]``.

    ``radius`` is signed for circular arcs: positive means the arc bulges to
    the right of the travel direction (outward on a counterclockwise chain),
    negative bulges to the left.
    """

    kind: str
    start: complex
    end: complex
    radius: float = 0.0
    curve: TrigCurve | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind == PARAMETRIC:
            if self.curve is None:
                raise GeometryError("parametric arc needs a curve")
            return
        if abs(self.end - self.start) == 0:
            raise GeometryError("arc endpoints must be distinct")
        if self.kind == CIRCULAR:
            chord = abs(self.end - self.start)
            if self.radius == 0 or abs(self.radius) < 0.5 * chord * (1 - 1e-12):
                raise GeometryError(
                    f"radius {self.radius} smaller than half the chord {chord / 2:.6g}"
                )
        elif self.kind != SEGMENT:
            raise GeometryError(f"unknown arc kind {self.kind!r}")

    @cached_property
    def _circle(self):
        a, b, r = self.start, self.end, self.radius
        chord = abs(b - a)
        u = (b - a) / chord
        h = math.sqrt(max(r * r - 0.25 * chord * chord, 0.0))
        # centre sits opposite the bulge; positive radius -> centre on the left
        centre = 0.5 * (a + b) + (1j * u * h if r > 0 else -1j * u * h)
        sweep = 2 * math.asin(min(1.0, 0.5 * chord / abs(r)))
        if r < 0:
            sweep = -sweep
        theta0 = np.angle(a - centre)
        return centre, abs(r), theta0, sweep

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == SEGMENT:
            return self.start + (self.end - self.start) * t
        if self.kind == CIRCULAR:
            c, r, th, sw = self._circle
            return c + r * np.exp(1j * (th + sw * t))
        return self.curve(t)

    def tangent(self, t):
        """Unit tangent in the travel direction."""
        t = np.asarray(t, dtype=float)
        if self.kind == SEGMENT:
            d = (self.end - self.start) * np.ones_like(t)
        elif self.kind == CIRCULAR:
            c, r, th, sw = self._circle
            d = 1j * sw * np.exp(1j * (th + sw * t))
        else:
            d = self.curve.derivative(t)
        return d / np.abs(d)

    @cached_property
    def length(self) -> float:
        if self.kind == SEGMENT:
            return abs(self.end - self.start)
        if self.kind == CIRCULAR:
            _, r, _, sw = self._circle
            return r * abs(sw)
        return self.curve.length

    def param_at_arclength(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == PARAMETRIC:
            return self.curve.param_at_arclength(s)
        return s / self.length

    def reversed(self) -> "Arc":
        if self.kind == PARAMETRIC:
            pts = self.curve.points
            rev = TrigCurve(np.concatenate([pts[:1], pts[:0:-1]]))
            return Arc(PARAMETRIC, self.end, self.start, curve=rev)
        return Arc(self.kind, self.end, self.start, -self.radius)

    def scaled(self, s: complex) -> "Arc":
        """Image under ``z -> s z`` (``s`` nonzero complex)."""
        if self.kind == PARAMETRIC:
            return Arc(PARAMETRIC, s * self.start, s * self.end,
                       curve=TrigCurve(s * self.curve.points))
        return Arc(self.kind, s * self.start, s * self.end, self.radius * abs(s))


@dataclass(frozen=True)
class Corner:
    vertex: complex
    alpha: float
    exterior_bisector: complex
    chain: int
    arc: int
    scale: float


def _polyline(chain, per_arc=256):
    pts = []
    for arc in chain:
        m = per_arc if arc.kind != SEGMENT else 2
        if arc.kind == PARAMETRIC:
            m = max(per_arc, 8 * arc.curve.points.size)
        pts.append(arc(np.arange(m) / m))
    return np.concatenate(pts)


def winding_number(poly, z):
    """Winding number of the closed polyline ``poly`` around each point of ``z``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(z.shape, dtype=float)
    nxt = np.roll(poly, -1)
    for k in range(0, z.size, 2048):
        zz = z.ravel()[k:k + 2048, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            ang = np.angle((nxt - zz) / (poly - zz))
        out.ravel()[k:k + 2048] = ang.sum(axis=1) / (2 * np.pi)
    return np.rint(out).astype(int)


def signed_area(chain) -> float:
    p = _polyline(chain)
    return 0.5 * float(np.imag(np.sum(np.conj(p) * np.roll(p, -1))))


@dataclass(frozen=True)
class Region:
    """A simply or doubly connected planar domain bounded by arc chains."""

    chains: tuple
    connectivity: str
    target: str
    domain_left: tuple
    corners: tuple
    spec: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        for chain in self.chains:
            scale = max(abs(a.start) for a in chain) + 1.0
            for a, b in zip(chain, chain[1:] + chain[:1]):
                if abs(a.end - b.start) > 1e-12 * scale:
                    raise GeometryError("chain is not closed")

    @cached_property
    def polylines(self):
        return [_polyline(c) for c in self.chains]

    @cached_property
    def diameter(self) -> float:
        p = np.concatenate(self.polylines)
        return float(np.max(np.abs(p[:, None] - p[None, ::7])))

    @cached_property
    def anchors(self):
        """Interior points of the holes that carry the logarithmic singularity.

        ``0`` for simply connected regions, the centroid of the inner curve for
        annuli, and one interior point per curve for disjoint pairs.
        """
        if self.connectivity == "simply":
            return (0j,)
        if self.connectivity == "annular":
            return (_inner_point(self.chains[1], self.polylines[1]),)
        return tuple(_inner_point(c, p) for c, p in zip(self.chains, self.polylines))

    def green_data(self, z):
        """Boundary data of the Green's-function Dirichlet problem."""
        z = np.asarray(z, dtype=complex)
        if self.connectivity == "disjoint_pair":
            c1, c2 = self.anchors
            return -np.log(np.abs((z - c2) / (z - c1)))
        return -np.log(np.abs(z - self.anchors[0]))

    def contains(self, z):
        """Open-domain membership via winding numbers."""
        z = np.asarray(z, dtype=complex)
        wn = [winding_number(p, z) for p in self.polylines]
        if self.connectivity == "simply":
            inside = wn[0] != 0
            return ~inside if self.target in EXTERIOR_TARGETS else inside
        if self.connectivity == "annular":
            return (wn[0] != 0) & (wn[1] == 0)
        return (wn[0] == 0) & (wn[1] == 0)

    def distance_to_boundary(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        pts = np.concatenate([_polyline(c, 2048) for c in self.chains])
        out = np.empty(z.shape)
        for k in range(0, z.size, 512):
            zz = z.ravel()[k:k + 512, None]
            out.ravel()[k:k + 512] = np.abs(zz - pts).min(axis=1)
        return out

    def scaled(self, s: complex) -> "Region":
        chains = [[a.scaled(s) for a in c] for c in self.chains]
        return _assemble(chains, self.connectivity, self.target, None)


def _inner_point(chain, poly):
    p = poly
    q = np.roll(p, -1)
    cross = np.imag(np.conj(p) * q)
    area = 0.5 * cross.sum()
    c = complex(((p + q) * cross).sum() / (6 * area)) if abs(area) > 0 else complex(p.mean())
    if winding_number(p, c)[0] != 0:
        return c
    # non-convex: fall back to the deepest vertex-mean point on a grid
    xs = np.linspace(p.real.min(), p.real.max(), 41)
    ys = np.linspace(p.imag.min(), p.imag.max(), 41)
    g = (xs[:, None] + 1j * ys[None, :]).ravel()
    g = g[winding_number(p, g) != 0]
    d = np.abs(g[:, None] - p[None, :]).min(axis=1)
    return complex(g[np.argmax(d)])


def _turn(chain, j):
    """Turning angle at the vertex where arc ``j`` starts."""
    prev, nxt = chain[j - 1], chain[j]
    t_in = complex(prev.tangent(1.0))
    t_out = complex(nxt.tangent(0.0))
    return t_in, t_out, float(np.angle(t_out / t_in))


def _find_corners(chains, domain_left):
    corners = []
    for ci, (chain, left) in enumerate(zip(chains, domain_left)):
        if len(chain) == 1 and chain[0].kind == PARAMETRIC:
            continue
        for j in range(len(chain)):
            t_in, t_out, theta = _turn(chain, j)
            if abs(theta) < _SMOOTH_TURN:
                continue
            if not left:
                t_in, t_out, theta = -t_out, -t_in, -theta
            alpha = 1.0 - theta / math.pi
            if alpha <= 1e-8 or alpha >= 2 - 1e-8:
                raise GeometryError(f"cusp at {chain[j].start}: unsupported corner")
            bisector = -t_out * np.exp(1j * math.pi * alpha / 2)
            scale = 0.5 * min(chain[j - 1].length, chain[j].length)
            corners.append(Corner(complex(chain[j].start), alpha, complex(bisector),
                                  ci, j, scale))
    return tuple(corners)


def _orient(chain, ccw: bool):
    area = signed_area(chain)
    if (area > 0) != ccw:
        chain = [a.reversed() for a in reversed(chain)]
    return chain


def _assemble(chains, connectivity, target, spec):
    if connectivity == "simply":
        chains = [_orient(chains[0], True)]
        left = (target not in EXTERIOR_TARGETS,)
    elif connectivity == "annular":
        chains = [_orient(chains[0], True), _orient(chains[1], False)]
        left = (True, True)
    else:
        chains = [_orient(c, True) for c in chains]
        left = (False, False)
    chains = tuple(tuple(c) for c in chains)
    corners = _find_corners(chains, left)
    region = Region(chains, connectivity, target, left, corners, spec)
    _validate(region)
    return region


def _validate(region):
    polys = region.polylines
    if region.connectivity == "simply":
        if winding_number(polys[0], 0j)[0] != 1:
            raise GeometryError("the origin must lie inside the boundary curve")
    elif region.connectivity == "annular":
        if winding_number(polys[0], polys[1]).min() < 1:
            raise GeometryError("inner curve must lie inside the outer curve")
    else:
        if np.any(winding_number(polys[0], polys[1]) != 0) or np.any(
            winding_number(polys[1], polys[0]) != 0
        ):
            raise GeometryError("disjoint-pair curves must not be nested or overlap")


# ---------------------------------------------------------------------------
# region specs

def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return np.sign(((b - a).conjugate() * (c - a)).imag)

    return (orient(p1, p2, q1) * orient(p1, p2, q2) < 0
            and orient(q1, q2, p1) * orient(q1, q2, p2) < 0)


def _check_simple(vertices):
    n = len(vertices)
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_cross(vertices[i], vertices[(i + 1) % n],
                               vertices[j], vertices[(j + 1) % n]):
                raise GeometryError(f"self-intersecting polygon (edges {i} and {j})")


def _point(p, where):
    try:
        if isinstance(p, (int, float)):
            return complex(p)
        x, y = p
        return complex(float(x), float(y))
    except (TypeError, ValueError):
        raise GeometryError(f"{where}: expected an [x, y] pair, got {p!r}") from None


def _chain_from_spec(spec, where="region"):
    if not isinstance(spec, dict) or "type" not in spec:
        raise GeometryError(f"{where}: missing field 'type'")
    kind = spec["type"]
    if kind == "polygon":
        if "vertices" not in spec:
            raise GeometryError(f"{where}: missing field 'vertices'")
        v = [_point(p, f"{where}.vertices") for p in spec["vertices"]]
        if len(v) < 3:
            raise GeometryError(f"{where}.vertices: degenerate polygon ({len(v)} vertices)")
        _check_simple(v)
        return [Arc(SEGMENT, v[i], v[(i + 1) % len(v)]) for i in range(len(v))]
    if kind == "circular_polygon":
        if "sides" not in spec:
            raise GeometryError(f"{where}: missing field 'sides'")
        sides = spec["sides"]
        if len(sides) < 2:
            raise GeometryError(f"{where}.sides: degenerate circular polygon")
        starts, radii = [], []
        for k, s in enumerate(sides):
            if isinstance(s, dict):
                if "start" not in s:
                    raise GeometryError(f"{where}.sides[{k}]: missing field 'start'")
                starts.append(_point(s["start"], f"{where}.sides[{k}].start"))
                radii.append(s.get("radius"))
            else:
                starts.append(_point(s, f"{where}.sides[{k}]"))
                radii.append(None)
        if len(starts) >= 3:
            _check_simple(starts)
        arcs = []
        for k, (a, r) in enumerate(zip(starts, radii)):
            b = starts[(k + 1) % len(starts)]
            try:
                if r is None or (isinstance(r, (int, float)) and math.isinf(r)):
                    arcs.append(Arc(SEGMENT, a, b))
                else:
                    arcs.append(Arc(CIRCULAR, a, b, float(r)))
            except GeometryError as e:
                raise GeometryError(f"{where}.sides[{k}].radius: {e}") from None
        return arcs
    if kind == "smooth":
        if "points" not in spec:
            raise GeometryError(f"{where}: missing field 'points'")
        pts = [_point(p, f"{where}.points") for p in spec["points"]]
        curve = TrigCurve(pts)
        z0 = complex(curve(0.0))
        return [Arc(PARAMETRIC, z0, z0, curve=curve)]
    raise GeometryError(f"{where}.type: unknown region type {kind!r}")


def parse_region(spec: dict, target: str | None = None) -> Region:
    """Build a :class:`Region` from a spec document (already JSON-decoded).

    ``target`` overrides ``spec["target"]``; the default is ``"disk"`` for
    simply connected specs and ``"annulus"`` otherwise.
    """
    if not isinstance(spec, dict) or "type" not in spec:
        raise GeometryError("region: missing field 'type'")
    target = target or spec.get("target")
    kind = spec["type"]
    if kind in ("annulus", "disjoint_pair"):
        keys = ("outer", "inner") if kind == "annulus" else ("left", "right")
        for k in keys:
            if k not in spec:
                raise GeometryError(f"region: missing field {k!r}")
        chains = [_chain_from_spec(spec[k], f"region.{k}") for k in keys]
        if target not in (None, "annulus"):
            raise GeometryError(f"region.target: {target!r} invalid for a doubly connected region")
        conn = "annular" if kind == "annulus" else "disjoint_pair"
        return _assemble(chains, conn, "annulus", spec)
    target = target or "disk"
    if target not in TARGETS or target == "annulus":
        raise GeometryError(f"region.target: invalid target {target!r}")
    return _assemble([_chain_from_spec(spec)], "simply", target, spec)


# convenience constructors producing spec documents

def _xy(z):
    z = complex(z)
    return [z.real, z.imag]


def polygon(vertices, target=None) -> Region:
    spec = {"type": "polygon", "vertices": [_xy(v) for v in vertices]}
    return parse_region(spec, target)


def circular_polygon(sides, target=None) -> Region:
    """``sides`` is a list of ``(start, radius)`` pairs; radius ``None`` for a segment."""
    spec = {"type": "circular_polygon",
            "sides": [{"start": _xy(s), "radius": r} if r is not None else {"start": _xy(s)}
                      for s, r in sides]}
    return parse_region(spec, target)


def smooth_spec(fn, n=512) -> dict:
    """Spec document for the closed curve ``fn(t)``, ``t in [0, 1)``, sampled at ``n`` points."""
    t = np.arange(n) / n
    return {"type": "smooth", "points": [_xy(z) for z in np.asarray(fn(t), dtype=complex)]}


def smooth(fn, n=512, target=None) -> Region:
    return parse_region(smooth_spec(fn, n), target)


def annulus(outer: dict, inner: dict) -> Region:
    return parse_region({"type": "annulus", "outer": outer, "inner": inner})


def disjoint_pair(left: dict, right: dict) -> Region:
    return parse_region({"type": "disjoint_pair", "left": left, "right": right})


def exterior_bisector(corner: Corner, region: Region) -> complex:
    """Unit direction pointing from ``corner.vertex`` out of the domain.

    For exterior targets this points into the bounded side of the curve.
    """
    if corner not in region.corners:
        raise GeometryError("corner does not belong to region")
    if corner.alpha <= 1e-8 or corner.alpha >= 2 - 1e-8:
        raise GeometryError("cusp: unsupported corner")
    return corner.exterior_bisector


# ---------------------------------------------------------------------------
# sampling

@dataclass(frozen=True)
class BoundarySamples:
    points: np.ndarray
    data: np.ndarray
    weights: np.ndarray
    curve_tag: np.ndarray
    normal_dist: np.ndarray
    arc_id: np.ndarray
    param: np.ndarray

    def __len__(self):
        return self.points.size


def _arc_params(region, n, corner_poles, extra):
    """Per-arc sorted parameter arrays: uniform base plus corner clustering."""
    params = {}
    for ci, chain in enumerate(region.chains):
        m_total = 8 * n
        total = sum(a.length for a in chain)
        for aj, arc in enumerate(chain):
            if arc.kind == PARAMETRIC:
                s = arc.length * np.arange(m_total) / m_total
                params[ci, aj] = [arc.param_at_arclength(s)]
                continue
            m = max(2, int(math.ceil(m_total * arc.length / total)))
            params[ci, aj] = [(np.arange(m) + 0.5) / m]
    if corner_poles:
        for k, corner in enumerate(region.corners):
            dist = corner_poles.get(k)
            if dist is None or len(dist) == 0:
                continue
            chain = region.chains[corner.chain]
            nxt = corner.arc
            prv = (corner.arc - 1) % len(chain)
            count = int(math.ceil(3 * len(dist)))
            lo = 0.5 * float(np.min(dist))
            for aj, from_end in ((nxt, False), (prv, True)):
                arc = chain[aj]
                hi = 0.5 * arc.length
                s = np.geomspace(lo, hi, count) if hi > lo else np.array([lo])
                t = arc.param_at_arclength(s)
                params[corner.chain, aj].append(1.0 - t if from_end else t)
    if extra:
        for key, t in extra.items():
            params[key].append(t)
    return {k: np.unique(np.concatenate(v)) for k, v in params.items()}


def _samples_from_params(region, params, weight_power=0.0):
    pts, tags, arc_ids, ts = [], [], [], []
    for (ci, aj), t in sorted(params.items()):
        arc = region.chains[ci][aj]
        pts.append(arc(t))
        tags.append(np.full(t.size, ci))
        arc_ids.append(np.full(t.size, aj))
        ts.append(t)
    z = np.concatenate(pts)
    tag = np.concatenate(tags)
    if region.corners:
        V = np.array([c.vertex for c in region.corners])
        S = np.array([c.scale for c in region.corners])
        D = np.abs(z[:, None] - V[None, :])
        nearest = np.argmin(D, axis=1)
        nd = D[np.arange(z.size), nearest]
        w = np.minimum(nd, S[nearest]) ** weight_power
        w = np.maximum(w / w.max(), 1e-8)
    else:
        nd = np.full(z.size, np.inf)
        w = np.ones(z.size)
    data = region.green_data(z)
    if not np.all(np.isfinite(data)):
        raise GeometryError("a boundary sample coincides with the logarithmic centre")
    return BoundarySamples(z, data, w, tag, nd, np.concatenate(arc_ids), np.concatenate(ts))


def sample_boundary(region: Region, n: int, corner_poles=None,
                    weight_power: float = 0.0) -> BoundarySamples:
    """Collocation points: ``8n`` per curve in arclength plus geometric
    clustering toward each corner with supplied pole distances.

    ``corner_poles`` maps corner index to the distances of the poles placed
    there; the innermost sample lands at half the smallest distance.
    Row weights are ``min(dist_to_corner, corner_scale) ** weight_power``
    normalised to a maximum of 1; the default power 0 gives uniform rows,
    which controls the maximum error best near corners.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    params = _arc_params(region, n, corner_poles, None)
    return _samples_from_params(region, params, weight_power)


def validation_samples(region: Region, samples: BoundarySamples) -> BoundarySamples:
    """Points midway (in parameter) between consecutive collocation points."""
    params = {}
    for ci, chain in enumerate(region.chains):
        for aj, arc in enumerate(chain):
            sel = (samples.curve_tag == ci) & (samples.arc_id == aj)
            t = np.sort(samples.param[sel])
            if arc.kind == PARAMETRIC:
                mids = 0.5 * (t + np.append(t[1:], t[0] + 1.0)) % 1.0
            else:
                tt = np.concatenate([[0.0], t, [1.0]])
                mids = 0.5 * (tt[1:] + tt[:-1])
            params[ci, aj] = np.unique(mids)
    return _samples_from_params(region, params)
