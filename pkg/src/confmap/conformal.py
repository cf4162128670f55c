"""Conformal maps onto disks and annuli from Green's-function Dirichlet solves,
compressed in both directions by AAA."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .aaa import DEFAULT_MMAX, BarycentricRational, aaa_fit, poles_residues_zeros
from .geometry import (
    EXTERIOR_TARGETS,
    GeometryError,
    Region,
    parse_region,
    sample_boundary,
    validation_samples,
)
from .lightning import LightningModel, place_poles, solve_dirichlet

ARTIFACT_VERSION = 1

# the Dirichlet solve runs this much tighter than the AAA tolerance so that
# the inverse fit sees consistent (W, Z) pairs near corner images
SOLVE_MARGIN = 0.1

CROWDING_HINT = (
    "the polynomial solve stagnated; deep lobes or fingers make the map "
    "exponentially distorted (crowding) and would need polynomial degrees in "
    "the thousands; try --method lightning"
)


@dataclass(frozen=True)
class MapOptions:
    tol: float = 1e-6
    method: str = "auto"
    target: str | None = None
    aaa_mmax: int = DEFAULT_MMAX

    def __post_init__(self):
        if not 1e-12 <= self.tol <= 1e-1:
            raise ValueError("tol must lie in [1e-12, 1e-1]")
        if self.method not in ("auto", "polynomial", "lightning", "corner_basis"):
            raise ValueError(f"unknown method {self.method!r}")


def _reciprocal(x):
    x = np.asarray(x, dtype=complex)
    out = np.full(x.shape, np.inf + 0j)
    zero = x == 0
    with np.errstate(all="ignore"):
        out[~zero] = 1.0 / x[~zero]
    out[np.isinf(x)] = 0
    return out


@dataclass(frozen=True)
class ConformalMap:
    """Forward map ``f`` and inverse ``f^-1`` as barycentric rationals.

    With ``inverted`` set (exterior-to-exterior maps, where both directions
    have a pole at infinity) the stored rationals act on reciprocals:
    ``f(z) = 1 / forward(1 / z)`` and likewise for the inverse.
    """

    forward: BarycentricRational
    inverse: BarycentricRational
    target: str
    modulus: float | None
    boundary_error: float
    converged: bool
    tol: float
    method: str
    inverted: bool = False
    diagnostics: dict = field(default_factory=dict, compare=False)
    region_spec: dict | None = field(default=None, compare=False)

    @property
    def degrees(self) -> tuple[int, int]:
        return self.forward.degree, self.inverse.degree

    def _apply(self, r, z):
        if self.inverted:
            return _reciprocal(r(_reciprocal(z)))
        return r(z)

    def __call__(self, z):
        return self._apply(self.forward, z)

    def inv(self, w):
        return self._apply(self.inverse, w)

    def _poles(self, r):
        if not self.inverted:
            return poles_residues_zeros(r).poles
        zeros = poles_residues_zeros(r).zeros
        # the zero at the origin is the pole at infinity
        zeros = zeros[np.abs(zeros) > 1e-12]
        return 1.0 / zeros

    def forward_poles(self) -> np.ndarray:
        """Finite poles of ``f``."""
        return self._poles(self.forward)

    def inverse_poles(self) -> np.ndarray:
        """Finite poles of ``f^-1``."""
        return self._poles(self.inverse)

    def to_dict(self) -> dict:
        diag = {k: v for k, v in self.diagnostics.items() if k != "timings"}
        return {
            "version": ARTIFACT_VERSION,
            "target": self.target,
            "rho": self.modulus,
            "boundary_error": self.boundary_error,
            "degrees": list(self.degrees),
            "converged": self.converged,
            "tol": self.tol,
            "method": self.method,
            "inverted": self.inverted,
            "forward": self.forward.to_dict(),
            "inverse": self.inverse.to_dict(),
            "diagnostics": diag,
            "region": self.region_spec,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConformalMap":
        return cls(
            BarycentricRational.from_dict(d["forward"]),
            BarycentricRational.from_dict(d["inverse"]),
            d["target"], d.get("rho"), float(d["boundary_error"]), bool(d["converged"]),
            float(d.get("tol", 1e-6)), d.get("method", "lightning"),
            bool(d.get("inverted", False)), dict(d.get("diagnostics", {})), d.get("region"),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "ConformalMap":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


# ---------------------------------------------------------------------------

def _retarget(region: Region, opts: MapOptions) -> Region:
    if opts.target is None or opts.target == region.target:
        return region
    if region.spec is None:
        raise ValueError("cannot change the target of a region built without a spec")
    return parse_region(region.spec, opts.target)


def _method(region, opts):
    if opts.method != "auto":
        return opts.method
    return "lightning" if region.corners else "polynomial"


def _solve_tol(opts):
    return max(SOLVE_MARGIN * opts.tol, 1e-12)


def _traversal_order(samples):
    return np.lexsort((samples.param, samples.arc_id, samples.curve_tag))


def _univalent(samples, W, tol):
    """Boundary images must wind once, monotonically, around the target circle(s)."""
    order = _traversal_order(samples)
    for tag in np.unique(samples.curve_tag):
        sel = order[samples.curve_tag[order] == tag]
        w = W[sel]
        dtheta = np.angle(np.roll(w, -1) / w)
        total = dtheta.sum() / (2 * np.pi)
        if abs(abs(total) - 1) > 1e-6:
            return False
        if np.any(np.sign(total) * dtheta < -10 * tol):
            return False
    return True


def _forward_values(region, model, Z):
    F = model(Z)
    t = region.target
    if region.connectivity == "disjoint_pair":
        c1, c2 = region.anchors
        return (Z - c2) / (Z - c1) * np.exp(F)
    if region.connectivity == "annular":
        return (Z - region.anchors[0]) * np.exp(F)
    if t in ("disk", "ext-ext"):
        return Z * np.exp(F)
    return 1.0 / (Z * np.exp(F))


def _target_radius(region, tags, rho):
    r = np.ones(tags.size)
    if rho is not None:
        r[tags == 1] = rho
    return r


def _compress(region, model, opts, method, rho=None):
    t0 = time.perf_counter()
    Z = model.samples.points
    W = _forward_values(region, model, Z)
    univalent = _univalent(model.samples, W, opts.tol)
    inverted = region.target == "ext-ext"
    # pinned value at the origin of the fitting variable
    pin = region.target == "disk" or inverted
    zf, wf = (1.0 / Z, 1.0 / W) if inverted else (Z, W)
    origin = np.zeros(1, complex)
    if pin:
        forward = aaa_fit(np.r_[origin, zf], np.r_[origin, wf], opts.tol, opts.aaa_mmax, force=[0])
    else:
        forward = aaa_fit(zf, wf, opts.tol, opts.aaa_mmax)
    if inverted:
        inverse = aaa_fit(np.r_[origin, wf], np.r_[origin, zf], opts.tol, opts.aaa_mmax,
                          force=[0])
    else:
        inverse = aaa_fit(wf, zf, opts.tol, opts.aaa_mmax)
    cmap_args = dict(target=region.target, modulus=rho, tol=opts.tol, method=method,
                     inverted=inverted, region_spec=region.spec)
    probe = ConformalMap(forward, inverse, boundary_error=0.0, converged=False, **cmap_args)
    inv_resid = float(np.max(np.abs(probe.inv(W) - Z)) / np.max(np.abs(Z)))
    t1 = time.perf_counter()
    vs = validation_samples(region, model.samples)
    target = _target_radius(region, vs.curve_tag, rho)
    berr = float(np.max(np.abs(np.abs(probe(vs.points)) - target)))
    # an inverse stopped at mmax is acceptable within the round-trip budget
    inverse_ok = inverse.converged or inv_resid <= 100 * opts.tol
    dirichlet_ok = model.error <= opts.tol
    converged = bool(dirichlet_ok and forward.converged and inverse_ok
                     and univalent and berr <= 10 * opts.tol)
    diag = {
        "dirichlet_error": model.error,
        "dirichlet_converged": dirichlet_ok,
        "dirichlet_history": [list(h) for h in model.history],
        "dof": model.dof,
        "aaa_converged": [forward.converged, inverse.converged],
        "inverse_residual": inv_resid,
        "univalent": univalent,
        "timings": {"solve": model.elapsed, "aaa": t1 - t0},
    }
    if not dirichlet_ok:
        diag["failure"] = (CROWDING_HINT if method == "polynomial"
                           else "Dirichlet solve did not reach the tolerance")
    elif not univalent:
        diag["failure"] = "boundary images are not univalent"
    elif not (forward.converged and inverse_ok):
        diag["failure"] = "AAA compression reached its maximum degree"
    elif not converged:
        diag["failure"] = "compressed map misses the boundary tolerance"
    return ConformalMap(forward, inverse, boundary_error=berr, converged=converged,
                        diagnostics=diag, **cmap_args)


def map_disk(region: Region, opts: MapOptions | None = None, **kw) -> ConformalMap:
    """Map a simply connected region to the unit disk (or a disk exterior).

    ``region.target`` selects the variant: ``disk`` (interior to interior,
    ``f(0) = 0``, ``f'(0) > 0``), ``int-ext``, ``ext-ext`` or ``ext-disk``.
    Failures are reported through ``converged`` and ``diagnostics["failure"]``.
    """
    opts = opts or MapOptions(**kw)
    region = _retarget(region, opts)
    if region.connectivity != "simply":
        raise GeometryError("map_disk needs a simply connected region")
    method = _method(region, opts)
    model = solve_dirichlet(region, tol=_solve_tol(opts), method=method)
    return _compress(region, model, opts, method)


def map_annulus(region: Region, opts: MapOptions | None = None, **kw) -> ConformalMap:
    """Map a doubly connected region onto ``rho < |w| < 1``.

    The outer curve (or the left curve of a disjoint pair) goes to ``|w| = 1``;
    ``rho`` comes out of the least-squares solve.
    """
    opts = opts or MapOptions(**kw)
    if region.connectivity == "simply":
        raise GeometryError("map_annulus needs a doubly connected region")
    method = _method(region, opts)
    model = solve_dirichlet(region, tol=_solve_tol(opts), method=method)
    rho = math.exp(model.modulus_coeff)
    if not 0 < rho < 1:
        raise GeometryError(f"computed modulus {rho} outside (0, 1)")
    return _compress(region, model, opts, method, rho)


def conformal_map(region: Region, opts: MapOptions | None = None, **kw) -> ConformalMap:
    if region.connectivity == "simply":
        return map_disk(region, opts, **kw)
    return map_annulus(region, opts, **kw)


# ---------------------------------------------------------------------------
# verification

@dataclass
class VerificationReport:
    boundary_error: float
    roundtrip_error: float
    forward_poles_inside: int
    expected_forward_poles: int
    inverse_poles_inside: int
    expected_inverse_poles: int
    f0: float | None
    arg_fprime0: float | None
    n_test: int
    flags: list

    @property
    def ok(self) -> bool:
        return not self.flags

    def lines(self):
        out = [
            f"boundary_error      {self.boundary_error:.3e}",
            f"roundtrip_error     {self.roundtrip_error:.3e}  ({self.n_test} points)",
            f"forward poles in region   {self.forward_poles_inside}"
            f" (expected {self.expected_forward_poles})",
            f"inverse poles in target   {self.inverse_poles_inside}"
            f" (expected {self.expected_inverse_poles})",
        ]
        if self.f0 is not None:
            out.append(f"|f(0)|              {self.f0:.3e}")
            out.append(f"|arg f'(0)|         {self.arg_fprime0:.3e}")
        out.append("flags: " + (", ".join(self.flags) if self.flags else "none"))
        return out


def fresh_boundary(region: Region, n: int = 97):
    """Boundary test grid distinct from any collocation grid."""
    dists = {k: place_poles(c, 12).distances for k, c in enumerate(region.corners)}
    return validation_samples(region, sample_boundary(region, n, dists))


def sample_interior(region: Region, n: int, seed: int = 0):
    """Quasi-random (Halton) points in the open region."""
    polys = np.concatenate(region.polylines)
    lo = np.array([polys.real.min(), polys.imag.min()])
    hi = np.array([polys.real.max(), polys.imag.max()])
    if region.connectivity == "disjoint_pair" or region.target in EXTERIOR_TARGETS:
        pad = 0.5 * (hi - lo)
        lo, hi = lo - pad, hi + pad
    sampler = qmc.Halton(d=2, seed=seed)
    out = np.zeros(0, complex)
    while out.size < n:
        x = qmc.scale(sampler.random(4 * n), lo, hi)
        z = x[:, 0] + 1j * x[:, 1]
        out = np.concatenate([out, z[region.contains(z)]])
    return out[:n]


def _fd_derivative(f, h):
    return (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h)


def verify_map(cmap: ConformalMap, region: Region, n_test: int = 1000,
               seed: int = 0) -> VerificationReport:
    tol = cmap.tol
    zb = fresh_boundary(region)
    target = _target_radius(region, zb.curve_tag, cmap.modulus)
    berr = float(np.max(np.abs(np.abs(cmap(zb.points)) - target)))

    z = sample_interior(region, n_test, seed)
    rt = float(np.max(np.abs(cmap.inv(cmap(z)) - z))) if z.size else 0.0

    eps = 1e-10 * region.diameter
    fp = cmap.forward_poles()
    closed = region.contains(fp) | (region.distance_to_boundary(fp) < eps) \
        if fp.size else np.zeros(0, bool)
    f_in = int(closed.sum())

    # the inverse data locate the target circles only to within eps_w
    eps_w = cmap.boundary_error + tol
    r = np.abs(cmap.inverse_poles())
    if cmap.modulus is not None:
        inside = (r > cmap.modulus + eps_w) & (r < 1 - eps_w)
    elif cmap.target in ("int-ext", "ext-ext"):
        inside = r > 1 + eps_w
    else:
        inside = r < 1 - eps_w
    i_in = int(inside.sum())
    # poles required by the target: f(0) = inf, f^-1(0) = inf, f^-1(w_inf) = inf
    f_expected = 1 if cmap.target == "int-ext" else 0
    expected = 1 if cmap.target == "ext-disk" or region.connectivity == "disjoint_pair" else 0
    flags = []
    if berr > 10 * tol:
        flags.append("boundary")
    if rt > 100 * tol:
        flags.append("roundtrip")
    if f_in != f_expected:
        flags.append("forward-poles")
    if i_in != expected:
        flags.append("inverse-poles")
    f0 = argd = None
    if cmap.target == "disk" and region.connectivity == "simply":
        f0 = float(abs(cmap(np.array([0j]))[0]))
        h = 1e-4 * region.diameter
        d = _fd_derivative(lambda s: cmap(np.array([s + 0j]))[0], h)
        argd = float(abs(np.angle(d)))
        if f0 > 1e-10 or argd > 1e-6:
            flags.append("normalization")
    return VerificationReport(berr, rt, f_in, f_expected, i_in, expected, f0, argd, int(z.size), flags)
