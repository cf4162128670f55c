"""Laplace Dirichlet solves by boundary least squares.

Three model families share one assembly path:

* ``polynomial``: Arnoldi-orthogonalised polynomial and/or Laurent blocks;
* ``lightning``: simple poles clustered exponentially toward each corner
  plus a low-degree smooth part;
* ``corner_basis``: fractional powers ``(z - z_j)^(k/alpha)`` at each corner
  plus a smooth part.

The returned :class:`LightningModel` represents an analytic ``F`` whose real
part fits the boundary data; its imaginary part is the harmonic conjugate.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .basis import LeastSquaresSystem, OrthoBasis, arnoldi_build, arnoldi_eval, solve_ls
from .geometry import (
    EXTERIOR_TARGETS,
    BoundarySamples,
    Corner,
    GeometryError,
    Region,
    sample_boundary,
    validation_samples,
)

log = logging.getLogger(__name__)

SIGMA = 4.0
MAX_DOF = 4000
MIN_POLE_DIST = 1e-14
METHODS = ("polynomial", "lightning", "corner_basis")


@dataclass(frozen=True)
class PoleSet:
    corner: int
    poles: np.ndarray
    distances: np.ndarray


def place_poles(corner: Corner, n: int, L: float | None = None, sigma: float = SIGMA,
                reach: float | None = None, index: int = 0) -> PoleSet:
    """Poles at ``vertex + d_j * bisector`` with ``d_j = L exp(-sigma (sqrt(n) - sqrt(j)))``.

    ``L`` defaults to the corner's local scale (half the shorter adjacent
    arc). Poles farther than ``reach`` from the vertex, or too close to
    resolve in double precision, are dropped.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    L = corner.scale if L is None else L
    if L <= 0:
        raise ValueError("L must be positive")
    j = np.arange(1, n + 1)
    d = L * np.exp(-sigma * (math.sqrt(n) - np.sqrt(j)))
    if reach is not None:
        d = d[d <= reach]
    # closer than this the pole is numerically on the vertex
    d = d[d >= MIN_POLE_DIST * max(1.0, abs(corner.vertex), L)]
    return PoleSet(index, corner.vertex + d * corner.exterior_bisector, d)


# ---------------------------------------------------------------------------
# basis blocks

class _PoleBlock:
    has_constant = False

    def __init__(self, pole_set: PoleSet):
        self.pole_set = pole_set
        self.poles = pole_set.poles
        self.size = self.poles.size

    def columns(self, z):
        return self.pole_set.distances / (z[:, None] - self.poles[None, :])


class _ArnoldiBlock:
    def __init__(self, basis: OrthoBasis, skip_constant: bool):
        self.basis = basis
        self.skip = skip_constant
        self.has_constant = not skip_constant
        self.size = basis.degree + (0 if skip_constant else 1)

    def columns(self, z):
        Q = arnoldi_eval(self.basis, z)
        return Q[:, 1:] if self.skip else Q


@dataclass(frozen=True)
class CornerTerms:
    vertex: complex
    rotation: complex
    scale: float
    exponents: np.ndarray

    def columns(self, z):
        zeta = (np.asarray(z) - self.vertex) * self.rotation / self.scale
        out = np.zeros((zeta.size, self.exponents.size), dtype=complex)
        nz = zeta != 0
        # principal branch: the cut lies along the exterior bisector
        out[nz] = np.exp(np.log(zeta[nz])[:, None] * self.exponents[None, :])
        return out


class _CornerBlock:
    has_constant = False

    def __init__(self, terms: CornerTerms):
        self.terms = terms
        self.size = terms.exponents.size

    def columns(self, z):
        return self.terms.columns(z)


def _columns(blocks, z):
    z = np.asarray(z, dtype=complex).ravel()
    if not blocks:
        return np.zeros((z.size, 0), dtype=complex)
    return np.hstack([b.columns(z) for b in blocks])


# ---------------------------------------------------------------------------
# model

@dataclass(frozen=True)
class LightningModel:
    """Analytic ``F = u + i v`` fitted to real boundary data.

    ``modulus_coeff`` is ``log(rho)`` for doubly connected Green's problems.
    """

    blocks: tuple
    coefficients: np.ndarray
    modulus_coeff: float | None
    normalization_shift: float
    error: float
    converged: bool
    method: str
    samples: BoundarySamples | None = field(default=None, repr=False)
    history: tuple = ()
    dof: int = 0
    elapsed: float = 0.0

    @property
    def pole_sets(self):
        return tuple(b.pole_set for b in self.blocks if isinstance(b, _PoleBlock))

    @property
    def poles(self):
        sets = self.pole_sets
        return np.concatenate([s.poles for s in sets]) if sets else np.zeros(0, complex)

    @property
    def smooth_parts(self):
        return tuple(b.basis for b in self.blocks if isinstance(b, _ArnoldiBlock))

    @property
    def corner_terms(self):
        return tuple(b.terms for b in self.blocks if isinstance(b, _CornerBlock))

    @property
    def n_terms(self) -> int:
        return int(self.coefficients.size)

    def __call__(self, z):
        return eval_model(self, z)

    def u(self, z):
        return eval_model(self, z).real

    def v(self, z):
        return eval_model(self, z).imag


def _raw_eval(blocks, coef, z):
    return _columns(blocks, z) @ coef


def eval_model(model: LightningModel, z) -> np.ndarray:
    """``F(z)`` with the normalisation shift applied to the imaginary part."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    zf = z.ravel()
    poles = model.poles
    if poles.size and zf.size and np.isin(zf, poles).any():
        raise ZeroDivisionError("evaluation point coincides with a model pole")
    with np.errstate(all="ignore"):
        F = _raw_eval(model.blocks, model.coefficients, zf) - 1j * model.normalization_shift
    if not np.all(np.isfinite(F[np.isfinite(zf)])):
        raise ZeroDivisionError("evaluation point too close to a model pole")
    return F.reshape(shape)


def zero_model(method: str = "lightning") -> LightningModel:
    return LightningModel((), np.zeros(0, complex), None, 0.0, 0.0, True, method)


# ---------------------------------------------------------------------------
# assembly

def _modulus_column(region, tags):
    return (tags == 1).astype(float)


def _fit(region, blocks, samples, data, with_modulus):
    C = _columns(blocks, samples.points)
    K = C.shape[1]
    keep_imag = np.ones(K, dtype=bool)
    start = 0
    for b in blocks:
        if b.has_constant:
            keep_imag[start] = False
        start += b.size
    cols = [C.real, -C.imag[:, keep_imag]]
    if with_modulus:
        cols.append(_modulus_column(region, samples.curve_tag)[:, None])
    A = np.hstack(cols)
    system = LeastSquaresSystem(A, data, weights=samples.weights)
    x, _ = solve_ls(system)
    coef = x[:K].astype(complex)
    coef[keep_imag] += 1j * x[K:K + int(keep_imag.sum())]
    t = float(x[-1]) if with_modulus else None
    return coef, t, A.shape[1]


def _normalization(region, blocks, coef, samples):
    if region.connectivity == "simply" and region.target not in EXTERIOR_TARGETS:
        return float(_raw_eval(blocks, coef, np.array([region.anchors[0]]))[0].imag)
    if region.connectivity == "annular":
        first = samples.points[samples.curve_tag == 0][0]
        return float(_raw_eval(blocks, coef, np.array([first]))[0].imag)
    # value at infinity is the real constant
    return 0.0


def _residuals(region, blocks, coef, t, samples, data_fn):
    vs = validation_samples(region, samples)
    resid = _raw_eval(blocks, coef, vs.points).real - data_fn(vs.points)
    if t is not None:
        resid = resid + t * (vs.curve_tag == 1)
    return vs.points, np.abs(resid)


def _smooth_blocks(region, samples, degree, wts):
    """Polynomial and/or Laurent blocks appropriate to the region's topology."""
    z = samples.points
    blocks = []
    conn = region.connectivity
    if conn == "simply" and region.target not in EXTERIOR_TARGETS:
        c = complex(np.mean(z))
        blocks.append(_ArnoldiBlock(arnoldi_build(z, wts, degree, c, +1), False))
    elif conn == "simply":
        blocks.append(_ArnoldiBlock(arnoldi_build(z, wts, degree, region.anchors[0], -1), False))
    elif conn == "annular":
        c = region.anchors[0]
        blocks.append(_ArnoldiBlock(arnoldi_build(z, wts, degree, c, +1), False))
        blocks.append(_ArnoldiBlock(arnoldi_build(z, wts, degree, c, -1), True))
    else:
        c1, c2 = region.anchors
        blocks.append(_ArnoldiBlock(arnoldi_build(z, wts, degree, c1, -1), False))
        blocks.append(_ArnoldiBlock(arnoldi_build(z, wts, degree, c2, -1), True))
    return blocks


def _valid_poles(region, ps: PoleSet) -> PoleSet:
    if ps.poles.size == 0:
        return ps
    ok = ~region.contains(ps.poles)
    return PoleSet(ps.corner, ps.poles[ok], ps.distances[ok])


def _pole_sets(region, n):
    sets = []
    for k, corner in enumerate(region.corners):
        ps = place_poles(corner, n, reach=region.diameter, index=k)
        sets.append(_valid_poles(region, ps))
    return sets


def _corner_terms(region, corner, K):
    alpha = corner.alpha
    ks = np.arange(1, K + 1) / alpha
    ks = ks[np.abs(ks - np.rint(ks)) > 1e-9]
    return CornerTerms(corner.vertex, -np.conj(corner.exterior_bisector),
                       region.diameter, ks)


def _schedule(method):
    # exponential convergence: linear steps in the term count
    if method == "corner_basis":
        return list(range(4, 201, 4))
    if method == "polynomial":
        ks = np.arange(4.0, 14.01, 0.5)
    else:
        ks = np.arange(2.0, 12.01, 0.5)
    return [int(round(2.0 ** k)) for k in ks]


def _build(region, method, n):
    """Blocks and samples for one step of the adaptive schedule."""
    if method == "polynomial":
        samples = sample_boundary(region, n)
        wts = samples.weights ** 2 / np.sum(samples.weights ** 2)
        return _smooth_blocks(region, samples, n, wts), samples
    if method == "lightning":
        sets = _pole_sets(region, n)
        samples = sample_boundary(region, n, {k: s.distances for k, s in enumerate(sets)})
        wts = samples.weights ** 2 / np.sum(samples.weights ** 2)
        deg = int(math.ceil(n / 2))
        blocks = [_PoleBlock(s) for s in sets if s.poles.size]
        return blocks + _smooth_blocks(region, samples, deg, wts), samples
    # corner_basis: sampling still clusters toward the corners
    dists = {}
    for k, corner in enumerate(region.corners):
        dists[k] = place_poles(corner, max(n, 4)).distances
    samples = sample_boundary(region, n, dists)
    wts = samples.weights ** 2 / np.sum(samples.weights ** 2)
    blocks = [_CornerBlock(_corner_terms(region, c, n)) for c in region.corners]
    blocks = [b for b in blocks if b.size]
    return blocks + _smooth_blocks(region, samples, n, wts), samples


def _with_data(samples, data_fn):
    if data_fn is None:
        return samples
    d = np.asarray(data_fn(samples.points), dtype=float)
    return BoundarySamples(samples.points, d, samples.weights, samples.curve_tag,
                           samples.normal_dist, samples.arc_id, samples.param)


def solve_dirichlet(region: Region, data=None, tol: float = 1e-6, method: str = "lightning",
                    with_modulus: bool | None = None, max_dof: int = MAX_DOF,
                    schedule=None) -> LightningModel:
    """Adaptive least-squares solve of a Laplace Dirichlet problem.

    Parameters
    ----------
    region : Region
    data : callable, optional
        Real boundary values ``data(z)``; defaults to the region's Green's
        data (``-log|z - c|`` or its disjoint-pair analogue).
    tol : float
        Target maximum boundary error on the validation grid.
    method : {"lightning", "polynomial", "corner_basis"}
    with_modulus : bool, optional
        Add the unknown ``log(rho)`` column (default: doubly connected
        regions with Green's data).

    The loop stops at ``tol``, on stagnation (less than a factor 2
    improvement over two refinements) or when the next system would exceed
    ``max_dof`` real unknowns. The best model seen is returned with
    ``converged`` set accordingly.
    """
    if not 1e-12 <= tol <= 1e-1:
        raise ValueError("tol must lie in [1e-12, 1e-1]")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if method == "corner_basis":
        for chain in region.chains:
            if any(a.kind not in ("segment", "circular") for a in chain):
                raise GeometryError("corner-basis model needs a polygon or circular polygon")
    if with_modulus is None:
        with_modulus = data is None and region.connectivity != "simply"
    data_fn = region.green_data if data is None else (lambda z: np.asarray(data(z), float))
    t0 = time.perf_counter()
    best = None
    history = []
    errs = []
    for n in schedule or _schedule(method):
        blocks, samples = _build(region, method, n)
        samples = _with_data(samples, None if data is None else data_fn)
        K = sum(b.size for b in blocks)
        dof = 2 * K - sum(b.has_constant for b in blocks) + int(with_modulus)
        if dof > max_dof:
            break
        if dof >= len(samples):
            continue
        coef, t, dof = _fit(region, blocks, samples, samples.data, with_modulus)
        _, resid = _residuals(region, blocks, coef, t, samples, data_fn)
        err = float(resid.max())
        history.append((n, dof, err))
        errs.append(err)
        log.debug("%s n=%d dof=%d err=%.3e", method, n, dof, err)
        if best is None or err < best[0]:
            best = (err, blocks, coef, t, samples, dof)
        if err <= tol:
            break
        if len(errs) >= 3 and errs[-3] < 2 * errs[-1]:
            break
    if best is None:
        raise ValueError("no admissible discretisation within the DOF budget")
    err, blocks, coef, t, samples, dof = best
    shift = _normalization(region, blocks, coef, samples)
    return LightningModel(
        tuple(blocks), coef, None if t is None else -t, shift, err, err <= tol, method,
        samples, tuple(history), dof, time.perf_counter() - t0,
    )


def corner_basis_model(region: Region, data=None, tol: float = 1e-6, **kw) -> LightningModel:
    """Dirichlet solve with explicit fractional-power corner terms instead of poles."""
    return solve_dirichlet(region, data, tol, method="corner_basis", **kw)
