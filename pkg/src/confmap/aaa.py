"""AAA barycentric rational approximation with spurious-pole cleanup."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

DEFAULT_TOL = 1e-6
DEFAULT_MMAX = 150
# residues this small (relative to max|F|) are rounding noise wherever they sit
RESIDUE_FLOOR = 1e-13


@dataclass(frozen=True)
class BarycentricRational:
    r"""``r(z) = sum(w f / (z - z_s)) / sum(w / (z - z_s))``.

    ``errors`` holds the maximum sample residual after each greedy step.
    """

    support: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    converged: bool = True
    errors: tuple = field(default=(), compare=False)

    @property
    def degree(self) -> int:
        return int(self.support.size) - 1

    def __call__(self, z):
        return bary_eval(self, z)

    def poles(self):
        return poles_residues_zeros(self).poles

    def to_dict(self) -> dict:
        def pairs(a):
            return [[float(v.real), float(v.imag)] for v in a]

        return {"support": pairs(self.support), "values": pairs(self.values),
                "weights": pairs(self.weights), "converged": bool(self.converged)}

    @classmethod
    def from_dict(cls, d: dict) -> "BarycentricRational":
        def arr(key):
            a = np.asarray(d[key], dtype=float).reshape(-1, 2)
            out = np.empty(a.shape[0], dtype=complex)
            # assign parts separately so signed zeros survive
            out.real, out.imag = a[:, 0], a[:, 1]
            return out

        return cls(arr("support"), arr("values"), arr("weights"),
                   bool(d.get("converged", True)))


@dataclass(frozen=True)
class PoleData:
    poles: np.ndarray
    residues: np.ndarray
    zeros: np.ndarray


def constant(value: complex, at: complex = 0j) -> BarycentricRational:
    return BarycentricRational(np.array([at], complex), np.array([value], complex),
                               np.array([1.0 + 0j]))


def bary_eval(r: BarycentricRational, z) -> np.ndarray:
    """Evaluate ``r``; support points return their stored values exactly and
    points at a pole return ``inf``."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    zv = z.ravel()
    out = np.empty(zv.size, dtype=complex)
    zs, fs, ws = r.support, r.values, r.weights
    wf = ws * fs
    for k in range(0, zv.size, 4096):
        zz = zv[k:k + 4096]
        with np.errstate(divide="ignore", invalid="ignore"):
            C = 1.0 / (zz[:, None] - zs[None, :])
            out[k:k + 4096] = (C @ wf) / (C @ ws)
    if zv.size:
        inf = np.isinf(zv)
        if inf.any():
            out[inf] = wf.sum() / ws.sum() if ws.sum() != 0 else np.inf
        bad = ~np.isfinite(out) & ~inf
        if bad.any():
            hit = zv[bad, None] == zs[None, :]
            at_support = hit.any(axis=1)
            vals = np.full(bad.sum(), np.inf, dtype=complex)
            vals[at_support] = fs[np.argmax(hit[at_support], axis=1)]
            out[bad] = vals
    return out.reshape(shape)


def _weights(Z, F, zs, fs):
    """Smallest right singular vector of the Loewner matrix on non-support rows."""
    C = 1.0 / (Z[:, None] - zs[None, :])
    A = (F[:, None] - fs[None, :]) * C
    full = A.shape[0] < A.shape[1]
    _, _, Vh = np.linalg.svd(A, full_matrices=full)
    return Vh[-1].conj()


class _IncrementalLoewner:
    """Economic QR of the masked Loewner matrix, updated one support point at
    a time: the new support row is zeroed by a rank-one update and the new
    column is appended by Gram-Schmidt, so each step costs ``O(N m + m^3)``."""

    def __init__(self, Z, F, mmax):
        N = Z.size
        self.Z, self.F = Z, F
        self.mask = np.ones(N, dtype=bool)
        self.C = np.empty((N, mmax), dtype=complex)
        self.A = np.empty((N, mmax), dtype=complex)
        self.Q = np.empty((N, mmax), dtype=complex)
        self.R = np.zeros((mmax, mmax), dtype=complex)
        self.idx = []
        self.w = np.ones(0, complex)

    @property
    def m(self):
        return len(self.idx)

    def add(self, j):
        Z, F, m = self.Z, self.F, self.m
        self.mask[j] = False
        if m:
            row = self.A[j, :m].copy()
            if np.any(row):
                u = np.zeros(Z.size, complex)
                u[j] = 1
                Q, Rm = scipy.linalg.qr_update(self.Q[:, :m], self.R[:m, :m], u, -row.conj(),
                                               check_finite=False)
                self.Q[:, :m], self.R[:m, :m] = Q, Rm
                self.A[j, :m] = 0
        with np.errstate(divide="ignore", invalid="ignore"):
            c = 1.0 / (Z - Z[j])
        c[~self.mask] = 0
        a = (F - F[j]) * c
        self.C[:, m], self.A[:, m] = c, a
        Q = self.Q[:, :m]
        h = Q.conj().T @ a
        v = a - Q @ h
        h2 = Q.conj().T @ v
        v -= Q @ h2
        beta = np.linalg.norm(v)
        self.R[:m, m] = h + h2
        self.R[m, m] = beta
        self.Q[:, m] = v / beta if beta > 0 else 0
        self.idx.append(j)
        m += 1
        _, _, Vh = np.linalg.svd(self.R[:m, :m])
        self.w = Vh[-1].conj()
        fs = F[self.idx]
        C = self.C[:, :m]
        out = F.copy()
        mk = self.mask
        out[mk] = (C[mk] @ (self.w * fs)) / (C[mk] @ self.w)
        return out


def _prepare(points, values):
    Z = np.asarray(points, dtype=complex).ravel()
    F = np.asarray(values, dtype=complex).ravel()
    if Z.size != F.size:
        raise ValueError("points and values must have equal length")
    if not (np.all(np.isfinite(Z)) and np.all(np.isfinite(F))):
        raise ValueError("points and values must be finite")
    _, idx = np.unique(Z, return_index=True)
    idx = np.sort(idx)
    return Z[idx], F[idx]


def aaa_fit(points, values, tol: float = DEFAULT_TOL, mmax: int = DEFAULT_MMAX,
            clean: bool = True, force=None) -> BarycentricRational:
    """Greedy AAA fit of ``values`` sampled at ``points``.

    Stops when the maximum residual falls to ``tol * max|values|`` or the
    degree reaches ``mmax``; in the latter case ``converged`` is False and the
    iterate with the smallest residual is returned. ``errors`` records the
    residual after every greedy step. Spurious poles are removed by
    :func:`cleanup` unless ``clean`` is False.

    ``force`` lists indices into ``points`` that become support points before
    the greedy steps (so the fit interpolates there); they survive cleanup.
    """
    forced = [] if force is None else [complex(np.ravel(points)[k]) for k in force]
    Z, F = _prepare(points, values)
    if Z.size < 4:
        raise ValueError("need at least 4 distinct points")
    if tol <= 0:
        raise ValueError("tol must be positive")
    scale = np.max(np.abs(F))
    if np.all(F == F[0]):
        return constant(F[0], Z[0])
    abstol = tol * scale
    N = Z.size
    mmax_eff = min(mmax + 1, N - 1)
    loewner = _IncrementalLoewner(Z, F, mmax_eff)
    R = np.full(F.shape, F.mean())
    for zf in forced:
        j = int(np.flatnonzero(Z == zf)[0])
        if loewner.mask[j]:
            R = loewner.add(j)
    errors = []
    converged = False
    best = (np.inf, 0)
    while loewner.m < mmax_eff:
        j = int(np.argmax(np.abs(F - R) * loewner.mask))
        R = loewner.add(j)
        err = float(np.max(np.abs(F - R)))
        errors.append(err)
        if err < best[0]:
            best = (err, loewner.m)
        if err <= abstol:
            converged = True
            break
    idx, w = loewner.idx, loewner.w
    if not converged and best[1] < len(idx):
        # the greedy residual is not monotone; fall back to the best iterate
        idx = idx[:best[1]]
        mask = np.ones(N, dtype=bool)
        mask[idx] = False
        w = _weights(Z[mask], F[mask], Z[idx], F[idx])
    r = BarycentricRational(Z[idx], F[idx], w, converged, tuple(errors))
    if clean:
        r = cleanup(r, Z, F, tol, keep=forced)
    return r


def poles_residues_zeros(r: BarycentricRational) -> PoleData:
    """Poles and zeros from ``(m+1) x (m+1)`` generalised eigenproblems;
    residues as ``N(p) / D'(p)``."""
    m = r.support.size
    if m < 2:
        e = np.zeros(0, complex)
        return PoleData(e, e, e)
    zs, fs, ws = r.support, r.values, r.weights
    B = np.eye(m + 1, dtype=complex)
    B[0, 0] = 0
    big = 1e13 * (1.0 + np.max(np.abs(zs)))

    def roots(top):
        E = np.zeros((m + 1, m + 1), dtype=complex)
        E[0, 1:] = top
        E[1:, 0] = 1
        E[np.arange(1, m + 1), np.arange(1, m + 1)] = zs
        with np.errstate(all="ignore"):
            ev = scipy.linalg.eigvals(E, B)
        return ev[np.isfinite(ev) & (np.abs(ev) < big)]

    pol = roots(ws)
    zer = roots(ws * fs)
    with np.errstate(all="ignore"):
        C = 1.0 / (pol[:, None] - zs[None, :])
        N = C @ (ws * fs)
        dD = -(C ** 2) @ ws
        res = N / dD
    return PoleData(pol, res, zer)


def _drop_supports(r, Z, F, poles, protected):
    """Refit ``r`` without the support point nearest each of ``poles``."""
    dist = np.abs(r.support[None, :] - poles[:, None])
    dist[:, np.isin(r.support, protected)] = np.inf
    drop = {int(np.argmin(row)) for row in dist if np.isfinite(row).any()}
    keep = np.array([k for k in range(r.support.size) if k not in drop], dtype=int)
    if not drop or keep.size == 0:
        return None
    zs, fs = r.support[keep], r.values[keep]
    if zs.size == 1:
        return BarycentricRational(zs, fs, np.ones(1, complex), r.converged, r.errors)
    mask = ~np.isin(Z, zs)
    return BarycentricRational(zs, fs, _weights(Z[mask], F[mask], zs, fs),
                               r.converged, r.errors)


def cleanup(r: BarycentricRational, points, values, tol: float,
            keep=()) -> BarycentricRational:
    """Remove Froissart doublets.

    A pole is spurious when ``|residue| / dist < tol * max|values|``, where
    ``dist`` is its distance to the nearest sample, i.e. its influence on the
    samples is below tolerance. Such poles are always removed. Poles with
    ``|residue| < 1e-13 * max|values|`` are removed as well unless that makes
    the sample residual worse than ``max(10 tol max|values|, 2 * before)``;
    tiny residues can belong to genuine poles resolving a branch point.

    The nearest support point to each spurious pole is deleted (points in
    ``keep`` never are) and the weights are recomputed by least squares.
    """
    protected = np.asarray(keep, dtype=complex)
    Z, F = _prepare(points, values)
    scale = np.max(np.abs(F)) if F.size else 0.0

    def resid(q):
        return float(np.max(np.abs(bary_eval(q, Z) - F))) if Z.size else 0.0

    use_floor = True
    for _ in range(max(r.degree, 0)):
        if r.degree < 1:
            break
        pd = poles_residues_zeros(r)
        if pd.poles.size == 0:
            break
        dist = np.abs(pd.poles[:, None] - Z[None, :]).min(axis=1)
        res = np.abs(pd.residues)
        strict = (res < tol * scale * dist) | ~np.isfinite(pd.residues)
        loose = strict | (res < RESIDUE_FLOOR * scale) if use_floor else strict
        cand = None
        if loose.any() and not np.array_equal(loose, strict):
            cand = _drop_supports(r, Z, F, pd.poles[loose], protected)
            if cand is not None and resid(cand) > max(10 * tol * scale, 2 * resid(r)):
                cand = None
                use_floor = False
        if cand is None and strict.any():
            cand = _drop_supports(r, Z, F, pd.poles[strict], protected)
        if cand is None:
            break
        r = cand
    return r
