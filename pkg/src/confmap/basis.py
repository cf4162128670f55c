"""Discretely orthogonal polynomial bases (Vandermonde with Arnoldi) and
dense real least squares."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

BREAKDOWN = 1e-14
RANK_TOL = 1e-14


@dataclass(frozen=True)
class OrthoBasis:
    """Arnoldi recurrence for the columns ``q_0 .. q_n``.

    ``q_{k+1} = (m(z) q_k - sum_{j<=k} H[j, k] q_j) / H[k+1, k]`` where the
    multiplier is ``z - center`` for ``sign=+1`` and ``1/(z - center)`` for
    ``sign=-1``. ``q_0`` is the constant ``1/sqrt(sum(weights))``.
    """

    nodes: np.ndarray
    hessenberg: np.ndarray
    center: complex
    sign: int
    q0: float
    Q: np.ndarray = field(repr=False)

    @property
    def degree(self) -> int:
        return self.hessenberg.shape[1]

    def multiplier(self, z):
        z = np.asarray(z, dtype=complex)
        if self.sign > 0:
            return z - self.center
        if np.any(z == self.center):
            raise ZeroDivisionError("evaluation at the centre of a negative-power block")
        return 1.0 / (z - self.center)


def arnoldi_build(nodes, weights=None, n=1, center=0j, sign=1) -> OrthoBasis:
    """Orthonormalise ``1, m, m^2, ..., m^n`` on ``nodes`` in the inner product
    ``<x, y> = sum(w * conj(x) * y)``.

    If the recurrence breaks down the degree is reduced (with a warning).
    """
    z = np.asarray(nodes, dtype=complex).ravel()
    w = np.ones(z.size) if weights is None else np.asarray(weights, dtype=float).ravel()
    if w.size != z.size or np.any(w <= 0):
        raise ValueError("weights must be positive, one per node")
    if n + 1 > z.size:
        raise ValueError("degree too high for the number of nodes")
    sign = 1 if sign > 0 else -1
    if sign < 0 and np.any(z == center):
        raise ZeroDivisionError("node coincides with the centre of a negative-power block")
    m = z - center if sign > 0 else 1.0 / (z - center)
    scale = float(np.max(np.abs(m))) if z.size else 1.0
    q0 = 1.0 / np.sqrt(w.sum())
    Q = np.empty((z.size, n + 1), dtype=complex)
    H = np.zeros((n + 1, n), dtype=complex)
    Q[:, 0] = q0
    k_done = n
    for k in range(n):
        v = m * Q[:, k]
        for _ in range(2):
            h = Q[:, : k + 1].conj().T @ (w * v)
            v = v - Q[:, : k + 1] @ h
            H[: k + 1, k] += h
        nrm = np.sqrt(np.sum(w * np.abs(v) ** 2))
        if nrm < BREAKDOWN * scale:
            warnings.warn(f"Arnoldi breakdown at degree {k + 1}; truncating basis",
                          RuntimeWarning, stacklevel=2)
            k_done = k
            break
        H[k + 1, k] = nrm
        Q[:, k + 1] = v / nrm
    Q = Q[:, : k_done + 1]
    H = H[: k_done + 1, :k_done]
    return OrthoBasis(z, H, complex(center), sign, float(q0), Q)


def arnoldi_eval(basis: OrthoBasis, points) -> np.ndarray:
    """Run the stored recurrence at ``points``; returns ``len(points) x (n+1)``."""
    z = np.asarray(points, dtype=complex).ravel()
    n = basis.degree
    out = np.empty((z.size, n + 1), dtype=complex)
    if z.size == 0:
        return out
    m = basis.multiplier(z)
    H = basis.hessenberg
    out[:, 0] = basis.q0
    for k in range(n):
        v = m * out[:, k] - out[:, : k + 1] @ H[: k + 1, k]
        out[:, k + 1] = v / H[k + 1, k]
    return out


@dataclass
class LeastSquaresSystem:
    """``weights * (matrix @ x - rhs)`` is minimised in the 2-norm."""

    matrix: np.ndarray
    rhs: np.ndarray
    column_map: list = field(default_factory=list)
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float).ravel()
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.rhs.size:
            raise ValueError("matrix and rhs sizes disagree")


def solve_ls(system: LeastSquaresSystem):
    """Column-pivoted orthogonal least-squares solve.

    Columns are equilibrated to unit norm first; singular directions below
    ``RANK_TOL`` relative to the largest are truncated.

    Returns
    -------
    x : ndarray
        Coefficients.
    residual : float
        Weighted residual 2-norm.
    """
    A, b = system.matrix, system.rhs
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("least-squares system has non-finite entries")
    if system.weights is not None:
        w = np.asarray(system.weights, dtype=float)
        A = A * w[:, None]
        b = b * w
    if A.shape[1] == 0:
        return np.zeros(0), float(np.linalg.norm(b))
    cn = np.linalg.norm(A, axis=0)
    cn[cn == 0] = 1.0
    y, *_ = scipy.linalg.lstsq(A / cn, b, cond=RANK_TOL, lapack_driver="gelsy",
                               check_finite=False)
    x = y / cn
    res = float(np.linalg.norm(A @ x - b))
    # truncation can in principle lose to the trivial solution
    if res > np.linalg.norm(b):
        return np.zeros_like(x), float(np.linalg.norm(b))
    return x, res
