"""The Hilbert space of velocity fields: Matern kernel of order 3.

Fields are finite kernel expansions v(x) = sum_i kappa(|x - x_i|/sigma) a_i
with control points x_i and momentum vectors a_i. The scalar kernel acts as
kappa * I2 on vector measures. Pairwise evaluations are delegated to the
compiled backend (see ``_kernels``).
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels
from .errors import ParameterError


@dataclass(frozen=True)
class KernelSpec:
    """Matern-3 kernel of width sigma."""

    sigma: float
    order: int = 3

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma <= 0.0:
            raise ParameterError("kernel width sigma must be positive")
        if self.order != 3:
            raise ParameterError("only the order-3 Matern kernel is supported")


@dataclass
class VelocityField:
    """Kernel expansion: control points (n, 2) and momenta (n, 2)."""

    spec: KernelSpec
    points: np.ndarray
    momenta: np.ndarray

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=np.float64)
        self.momenta = np.ascontiguousarray(self.momenta, dtype=np.float64)
        if self.points.shape != self.momenta.shape or self.points.ndim != 2:
            raise ParameterError("points and momenta must both have shape (n, 2)")

    def evaluate(self, queries):
        """Values and Jacobians of the field at the query points."""
        return _kernels.eval_field(
            self.points, self.momenta, np.ascontiguousarray(queries, np.float64),
            self.spec.sigma,
        )


def kappa(t):
    """Matern-3 profile (1 + t + 2 t^2/15 + t^3/15) exp(-t) for t >= 0."""
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0.0):
        raise ParameterError("kappa is defined for nonnegative arguments")
    out = (1.0 + t + 2.0 * t * t / 15.0 + t**3 / 15.0) * np.exp(-t)
    return out if out.ndim else float(out)


def kappa_derivatives(t):
    """First and second derivatives of kappa, closed form.

    kappa'(t) = -exp(-t) t (11 - t + t^2) / 15 (zero at t = 0),
    kappa''(t) = exp(-t) (-11 + 13 t - 4 t^2 + t^3) / 15.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0.0):
        raise ParameterError("kappa is defined for nonnegative arguments")
    e = np.exp(-t)
    d1 = -e * t * (11.0 - t + t * t) / 15.0
    d2 = e * (-11.0 + 13.0 * t - 4.0 * t * t + t**3) / 15.0
    if d1.ndim:
        return d1, d2
    return float(d1), float(d2)


def gram_matrix(points, spec):
    """G[i, j] = kappa(|x_i - x_j| / sigma); symmetric PSD, unit diagonal."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    if len(points) == 0:
        raise ParameterError("gram_matrix needs at least one point")
    return _kernels.gram(points, spec.sigma)


def eval_field(v, queries):
    """Evaluate a VelocityField: (values (m, 2), jacobians (m, 2, 2))."""
    return v.evaluate(queries)


def v_norm_squared(v):
    """Squared V-norm a^T G a of a kernel expansion (vector momenta)."""
    if len(v.points) == 0:
        return 0.0
    g = gram_matrix(v.points, v.spec)
    return float(np.einsum("ij,id,jd->", g, v.momenta, v.momenta))


def collapse_points(points, tol):
    """Merge near-duplicate points (pairwise distance < tol).

    Returns (unique_points, index_map) where index_map sends each original
    index to its representative's row in unique_points. Representatives keep
    their original relative order (first occurrence wins).
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    n = len(points)
    pairs = cKDTree(points).query_pairs(r=tol, output_type="ndarray")
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(n)])
    reps = np.unique(roots)
    index_map = np.searchsorted(reps, roots)
    return points[reps], index_map
