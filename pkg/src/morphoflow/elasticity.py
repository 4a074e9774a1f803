"""Isotropic linear-elastic deformation energy on the deformed domain.

The bilinear form pairs strains eps_v = (Dv + Dv^T)/2 of two velocity
fields over the current configuration:

    (A v | w) = int [lambda tr(eps_v) tr(eps_w) + 2 mu tr(eps_v^T eps_w)] dx.

Its Galerkin restriction to the kernel sections kappa(|. - x_i|/sigma) e_d
reduces to weighted products of the kernel-gradient tensor, assembled with
dense BLAS.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import blas

from . import _kernels
from .errors import DegenerateDeformationError, ParameterError


@dataclass(frozen=True)
class ElasticParams:
    """Lame parameters of the homogeneous isotropic material."""

    lam: float = 0.0
    mu: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.mu) or self.mu <= 0.0:
            raise ParameterError("shear modulus mu must be positive")
        if not np.isfinite(self.lam) or self.lam < 0.0:
            raise ParameterError("first Lame parameter lambda must be >= 0")


def _deformed_quadrature(mesh, state):
    if np.any(state.jac <= 0.0):
        raise DegenerateDeformationError("state has non-positive Jacobians")
    pts, w = mesh.quadrature(state.positions)
    if np.any(w <= 0.0):
        raise DegenerateDeformationError("deformed mesh has inverted triangles")
    return pts, w


def elastic_pairing(mesh, state, params, v, w):
    """(A_phi v | w) by quadrature over the deformed triangles.

    ``v`` and ``w`` only need an ``evaluate(queries) -> (values, jacobians)``
    method; kernel fields use their analytic Jacobians.
    """
    qpts, qw = _deformed_quadrature(mesh, state)
    _, dv = v.evaluate(qpts)
    _, dw = w.evaluate(qpts)
    eps_v = 0.5 * (dv + np.transpose(dv, (0, 2, 1)))
    eps_w = 0.5 * (dw + np.transpose(dw, (0, 2, 1)))
    tr_v = np.trace(eps_v, axis1=1, axis2=2)
    tr_w = np.trace(eps_w, axis1=1, axis2=2)
    dots = np.einsum("qij,qij->q", eps_v, eps_w)
    return float(np.sum(qw * (params.lam * tr_v * tr_w + 2.0 * params.mu * dots)))


def assemble_elastic_matrix(mesh, state, params, points, spec, quad=None, grad=None):
    """Dense (2n, 2n) restriction of the elastic form to the kernel basis.

    Interleaved layout: row 2 i + d is the basis field kappa(|. - x_i|/sigma)
    e_d. The basis field's strain only involves the kernel gradient g_i(q),
    so the whole matrix reduces to the three weighted Gram products
    C_ab = G_a^T diag(w) G_b of the gradient-component matrices.

    ``quad`` and ``grad`` allow reuse of the quadrature and gradient tensor
    across the assemblies of one time step.
    """
    if quad is None:
        quad = _deformed_quadrature(mesh, state)
    qpts, qw = quad
    if grad is None:
        grad = _kernels.grad_tensor(
            np.ascontiguousarray(points, np.float64), qpts, spec.sigma
        )
    g0, g1 = grad[0], grad[1]
    n = g0.shape[1]
    root_w = np.sqrt(qw)[:, None]
    sg0 = root_w * g0
    sg1 = root_w * g1
    # the two symmetric products via dsyrk (half the flops of dgemm)
    c00 = blas.dsyrk(1.0, sg0, trans=1, lower=0)
    c11 = blas.dsyrk(1.0, sg1, trans=1, lower=0)
    upper = np.triu_indices(n, k=1)
    c00[(upper[1], upper[0])] = c00[upper]
    c11[(upper[1], upper[0])] = c11[upper]
    c01 = sg0.T @ sg1
    c10 = c01.T

    lam, mu = params.lam, params.mu
    trace_part = mu * (c00 + c11)
    a = np.empty((2 * n, 2 * n))
    a[0::2, 0::2] = lam * c00 + mu * c00 + trace_part
    a[0::2, 1::2] = lam * c01 + mu * c10
    a[1::2, 0::2] = lam * c10 + mu * c01
    a[1::2, 1::2] = lam * c11 + mu * c11 + trace_part
    return a
