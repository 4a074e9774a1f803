"""Lagrangian reaction-diffusion on the reference mesh.

The Eulerian equation dp/dt = div(S grad p) + R(p) with zero-flux boundary,
pulled back through the current deformation, becomes an equation for the
Lagrangian density tau with the diffusion tensor S_phi = Dphi^-1 S Dphi^-T,
a Jacobian-weighted flux, and a drift along grad(J)/J. Time stepping is
semi-implicit: diffusion and drift implicit, the Lipschitz reaction explicit.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DegenerateDeformationError, NumericalError, ParameterError
from .geometry import _QUAD_BARY, DensityField, recover_gradient


@dataclass(frozen=True)
class DiffusionSpec:
    """Eulerian diffusion rates along the x and y axes."""

    rates: tuple

    def __post_init__(self):
        r1, r2 = self.rates
        if r1 <= 0.0 or r2 <= 0.0:
            raise ParameterError("diffusion rates must be positive")


@dataclass(frozen=True)
class BumpProfile:
    """C^2 piecewise-polynomial profile supported on [p_min, p_max].

    ``symmetric_bump``: height * (4 u (1 - u))^3 with u the normalized
    coordinate on the support; peak at the midpoint.
    ``plateau_bump``: quintic smoothstep up on the first fifth of the
    support, flat top, smoothstep down on the last fifth.

    Value and first two derivatives vanish at both endpoints; the profile
    is globally Lipschitz and bounded by ``height``.
    """

    p_min: float
    p_max: float
    height: float
    shape: str = "symmetric_bump"

    def __post_init__(self):
        if not self.p_min < self.p_max:
            raise ParameterError("bump support requires p_min < p_max")
        if self.height <= 0.0:
            raise ParameterError("bump height must be positive")
        if self.shape not in ("symmetric_bump", "plateau_bump"):
            raise ParameterError(f"unknown bump shape {self.shape!r}")


def _smoothstep5(w):
    # quintic smoothstep: value/first/second derivative vanish at 0 and 1
    return w**3 * (10.0 - 15.0 * w + 6.0 * w * w)


def bump_eval(profile, p):
    """Evaluate a bump profile at p (scalar or array)."""
    scalar = np.isscalar(p) or np.ndim(p) == 0
    p = np.atleast_1d(np.asarray(p, dtype=np.float64))
    u = (p - profile.p_min) / (profile.p_max - profile.p_min)
    inside = (u > 0.0) & (u < 1.0)
    u = np.clip(u, 0.0, 1.0)
    if profile.shape == "symmetric_bump":
        vals = (4.0 * u * (1.0 - u)) ** 3
    else:
        vals = np.ones_like(u)
        lo = u < 0.2
        hi = u > 0.8
        vals[lo] = _smoothstep5(u[lo] / 0.2)
        vals[hi] = _smoothstep5((1.0 - u[hi]) / 0.2)
    out = np.where(inside, profile.height * vals, 0.0)
    return float(out[0]) if scalar else out


def pullback_diffusion(mesh, state, spec):
    """Per-element S_phi = Dphi^-1 diag(r1, r2) Dphi^-T, shape (t, 2, 2).

    Uses the element average of the nodal deformation gradients.
    """
    dbar = state.grad[mesh.triangles].mean(axis=1)  # (t, 2, 2)
    det = dbar[:, 0, 0] * dbar[:, 1, 1] - dbar[:, 0, 1] * dbar[:, 1, 0]
    if np.any(det <= 0.0):
        raise DegenerateDeformationError(
            "element-averaged deformation gradient is singular"
        )
    inv = np.empty_like(dbar)
    inv[:, 0, 0] = dbar[:, 1, 1]
    inv[:, 0, 1] = -dbar[:, 0, 1]
    inv[:, 1, 0] = -dbar[:, 1, 0]
    inv[:, 1, 1] = dbar[:, 0, 0]
    inv /= det[:, None, None]
    r1, r2 = spec.rates
    s = np.einsum("tab,b,tcb->tac", inv, np.array([r1, r2]), inv)
    return 0.5 * (s + np.transpose(s, (0, 2, 1)))


def assemble_rd_system(mesh, state, spec):
    """Piecewise-linear Galerkin operators on the reference mesh.

    Returns (stiffness K, drift D, lumped mass M) with
        K[i, j] = int J (S_phi grad psi_j) . grad psi_i,
        D[i, j] = -int psi_j J (S_phi g) . grad psi_i,  g = recovered grad(log J),
        M[i]    = int J psi_i,
    so that row/column sums of K + D vanish and the M-weighted total mass is
    conserved by the zero-reaction step (natural Neumann condition).
    """
    tris = mesh.triangles
    areas = mesh.triangle_areas()
    gpsi = mesh.basis_gradients()  # (t, 3, 2), reference coordinates
    s = pullback_diffusion(mesh, state, spec)

    j_nodal = state.jac
    if np.any(j_nodal <= 0.0):
        raise DegenerateDeformationError("state has non-positive Jacobians")
    j_tri = j_nodal[tris]  # (t, 3)
    jq = j_tri @ _QUAD_BARY.T  # (t, 3) J at the rule points
    jbar = j_tri.mean(axis=1)

    g_nodal = recover_gradient(np.log(j_nodal), mesh)
    gq = np.einsum("kv,tvd->tkd", _QUAD_BARY, g_nodal[tris])  # (t, 3, 2)

    k_local = np.einsum("tab,tmb,tla->tlm", s, gpsi, gpsi) * (areas * jbar)[
        :, None, None
    ]
    sg = np.einsum("tab,tkb->tka", s, gq)
    flux_dot = np.einsum("tka,tla->tkl", sg, gpsi)
    d_local = -np.einsum("km,tk,tkl->tlm", _QUAD_BARY, jq, flux_dot) * (
        areas / 3.0
    )[:, None, None]

    rows = np.broadcast_to(tris[:, :, None], (len(tris), 3, 3)).ravel()
    cols = np.broadcast_to(tris[:, None, :], (len(tris), 3, 3)).ravel()
    n = mesh.n_nodes
    stiffness = sp.coo_matrix((k_local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    drift = sp.coo_matrix((d_local.ravel(), (rows, cols)), shape=(n, n)).tocsr()

    m_local = np.einsum("kl,tk->tl", _QUAD_BARY, jq) * (areas / 3.0)[:, None]
    mass = np.zeros(n)
    np.add.at(mass, tris.ravel(), m_local.ravel())
    return stiffness, drift, mass


class DensityStepper:
    """Repeated semi-implicit stepping for a fixed deformation state.

    Factorizes (M/dt + K + D) once; ``step`` advances a density by dt with
    the reaction term evaluated explicitly at the current density.
    """

    def __init__(self, mesh, state, spec, reaction, dt, system=None):
        if dt <= 0.0:
            raise ParameterError("dt must be positive")
        self.mesh = mesh
        self.reaction = reaction
        self.dt = dt
        self.jac = state.jac
        stiffness, drift, mass = (
            assemble_rd_system(mesh, state, spec) if system is None else system
        )
        self.mass = mass
        lhs = (sp.diags(mass / dt) + stiffness + drift).tocsc()
        try:
            self.solver = spla.splu(lhs)
        except RuntimeError as exc:
            raise NumericalError(f"reaction-diffusion system factorization: {exc}")

    def step(self, tau):
        rhs = self.mass / self.dt * tau.values
        if self.reaction is not None:
            rhs = rhs + self.mass * bump_eval(self.reaction, tau.values / self.jac)
        out = self.solver.solve(rhs)
        if not np.all(np.isfinite(out)):
            raise NumericalError("reaction-diffusion solve produced non-finite values")
        return DensityField(out)


def step_density(mesh, tau, state, spec, reaction, dt, system=None):
    """One semi-implicit step of the Lagrangian reaction-diffusion equation."""
    return DensityStepper(mesh, state, spec, reaction, dt, system=system).step(tau)


def initial_potential(c, r, h, mesh):
    """Shifted radial initial potential h (|x-c|^2/r^2 - 1)^2 on B(c, r)."""
    if r <= 0.0 or h <= 0.0:
        raise ParameterError("potential radius and height must be positive")
    c = np.asarray(c, dtype=np.float64)
    d2 = np.sum((mesh.nodes - c) ** 2, axis=1)
    vals = h * (d2 / (r * r) - 1.0) ** 2
    vals[d2 >= r * r] = 0.0
    return DensityField(vals)
