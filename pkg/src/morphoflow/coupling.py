"""The closed loop: yank assembly, regularized elastic velocity solve,
flow integration, and the interleaved density step.

Each time step solves the variational problem

    v = argmin (omega/2) <v, v>_V + (1/2) (A_phi v | v) - (j | v)

restricted to kernel fields anchored at the deformed node positions, i.e.
the dense SPD system (omega G + A) a = j in the momenta, then advances the
flow and deformation gradients by forward Euler and steps the density on
the updated state.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

from . import _kernels
from .elasticity import ElasticParams, _deformed_quadrature, assemble_elastic_matrix
from .errors import (
    AssemblyError,
    DegenerateDeformationError,
    DiffeomorphismError,
    NumericalError,
    ParameterError,
)
from .geometry import DeformationState, DensityField
from .reaction_diffusion import BumpProfile, DensityStepper, DiffusionSpec, bump_eval
from .rkhs import KernelSpec, VelocityField, collapse_points, gram_matrix

logger = logging.getLogger(__name__)

_RESIDUAL_TOL = 1e-12
_MAX_REFINE = 5


@dataclass(frozen=True)
class MeshParams:
    semi_axes: tuple = (1.0, 0.6)
    edge_length: float = 0.075


@dataclass(frozen=True)
class PotentialParams:
    center: tuple = (-0.5, 0.3)
    radius: float = 0.4
    height: float = 0.8


@dataclass(frozen=True)
class OutputParams:
    directory: str = "out"
    every: int = 1


@dataclass(frozen=True)
class SimulationConfig:
    """All physical and numerical parameters of one simulation."""

    omega: float = 2.0
    kernel: KernelSpec = field(default_factory=lambda: KernelSpec(sigma=0.2))
    elastic: ElasticParams = field(default_factory=ElasticParams)
    diffusion: DiffusionSpec = field(
        default_factory=lambda: DiffusionSpec(rates=(0.025, 0.005))
    )
    reaction: BumpProfile = field(
        default_factory=lambda: BumpProfile(0.01, 1.0, 1.0, "symmetric_bump")
    )
    yank: BumpProfile = field(
        default_factory=lambda: BumpProfile(0.01, 1.0, 1.0, "plateau_bump")
    )
    dt: float = 0.25
    T: float = 25.0
    output: OutputParams = field(default_factory=OutputParams)
    mesh: MeshParams = field(default_factory=MeshParams)
    potential: PotentialParams = field(default_factory=PotentialParams)
    inner_iters: int = 2
    varifold_sigma_w: float = 0.3

    def __post_init__(self):
        if self.omega <= 0.0:
            raise ParameterError("regularization weight omega must be positive")
        if self.varifold_sigma_w <= 0.0:
            raise ParameterError("varifold kernel width must be positive")
        if self.dt <= 0.0:
            raise ParameterError("dt must be positive")
        if self.T < self.dt:
            raise ParameterError("horizon T must be at least one step")
        if self.inner_iters < 1:
            raise ParameterError("inner_iters must be >= 1")

    @property
    def n_steps(self):
        return int(round(self.T / self.dt))


@dataclass
class Trajectory:
    """Snapshots (time, state, density) plus per-step diagnostics."""

    entries: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    def append(self, time, state, tau):
        if self.entries and time <= self.entries[-1][0]:
            raise ParameterError("snapshot times must be strictly increasing")
        self.entries.append((time, state, tau))

    @property
    def times(self):
        return [t for t, _, _ in self.entries]

    def final(self):
        return self.entries[-1]


def vector_gram(gram):
    """Expand the scalar Gram matrix to vector momenta: G (x) I_2."""
    return np.kron(gram, np.eye(2))


def assemble_yank(mesh, state, tau, yank_profile, points, spec, quad=None, grad=None):
    """Dual vector j[(i, d)] = int Q(p) (-div kappa(|. - x_i|/sigma) e_d) dx.

    The divergence of the basis field (i, d) is the d-component of the
    kernel gradient, so the assembly reuses the same gradient tensor as the
    elastic matrix. Quadrature runs over the deformed triangles with the
    Eulerian density p interpolated from tau / jac.
    """
    if quad is None:
        quad = _deformed_quadrature(mesh, state)
    qpts, qw = quad
    if grad is None:
        grad = _kernels.grad_tensor(
            np.ascontiguousarray(points, np.float64), qpts, spec.sigma
        )
    p_nodal = tau.values / state.jac
    p_quad = mesh.interpolate_at_quadrature(p_nodal)
    weights = qw * bump_eval(yank_profile, p_quad)
    return -np.stack([weights @ grad[0], weights @ grad[1]], axis=1).ravel()


def solve_velocity(j, gram, elastic, omega):
    """Solve (omega G + A) a = j by Cholesky with iterative refinement.

    Returns the momenta as a flat vector in the interleaved (i, d) layout.
    Raises AssemblyError if the system is not positive definite and
    NumericalError if the residual cannot be driven below 1e-12 |j|.
    """
    j = np.asarray(j, dtype=np.float64)
    norm_j = np.linalg.norm(j)
    if norm_j == 0.0:
        return np.zeros_like(j)
    system = omega * gram + elastic
    try:
        chol = sla.cho_factor(system, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise AssemblyError(f"velocity system is not positive definite: {exc}")
    a = sla.cho_solve(chol, j, check_finite=False)
    for _ in range(_MAX_REFINE):
        residual = j - system @ a
        if np.linalg.norm(residual) <= _RESIDUAL_TOL * norm_j:
            return a
        a = a + sla.cho_solve(chol, residual, check_finite=False)
    residual = np.linalg.norm(j - system @ a)
    if residual > 1e-10 * norm_j:
        raise NumericalError(
            f"velocity solve stalled at relative residual {residual / norm_j:.3e}"
        )
    return a


def advance_flow(state, v, dt):
    """Forward-Euler update of positions and deformation gradients.

    positions += dt v(positions); grad <- (I + dt Dv(positions)) grad;
    jac is recomputed as det(grad). Raises DiffeomorphismError if any
    Jacobian becomes non-positive (time step too large).
    """
    if dt <= 0.0:
        raise ParameterError("dt must be positive")
    values, dv = v.evaluate(state.positions)
    positions = state.positions + dt * values
    step_mat = dt * dv
    step_mat[:, 0, 0] += 1.0
    step_mat[:, 1, 1] += 1.0
    grad = step_mat @ state.grad
    jac = grad[:, 0, 0] * grad[:, 1, 1] - grad[:, 0, 1] * grad[:, 1, 0]
    if np.any(jac <= 0.0):
        bad = int(np.argmin(jac))
        raise DiffeomorphismError(
            f"flow step to t = {state.time + dt:g} lost invertibility at node "
            f"{bad} (jac = {jac[bad]:.3e}); reduce dt"
        )
    return DeformationState(positions, grad, jac, state.time + dt)


def _solve_step(mesh, state, tau, config):
    """Assemble and solve one velocity problem at the given state.

    Returns (field, diagnostics); field is None when the yank vanishes
    identically (density below the yank support everywhere).
    """
    p_nodal = tau.values / state.jac
    if np.max(p_nodal, initial=0.0) <= config.yank.p_min:
        return None, {"vnorm2": 0.0, "yank_dot": 0.0}

    points, index_map = collapse_points(
        state.positions, 1e-9 * config.kernel.sigma
    )
    quad = _deformed_quadrature(mesh, state)
    grad = _kernels.grad_tensor(points, quad[0], config.kernel.sigma)
    scalar_gram = gram_matrix(points, config.kernel)
    gram = vector_gram(scalar_gram)
    elastic = assemble_elastic_matrix(
        mesh, state, config.elastic, points, config.kernel, quad=quad, grad=grad
    )
    j = assemble_yank(
        mesh, state, tau, config.yank, points, config.kernel, quad=quad, grad=grad
    )
    a = solve_velocity(j, gram, elastic, config.omega)
    momenta = a.reshape(-1, 2)
    vnorm2 = float(np.einsum("ij,id,jd->", scalar_gram, momenta, momenta))
    yank_dot = float(j @ a)
    if config.omega * vnorm2 > yank_dot + 1e-9 * max(1.0, abs(yank_dot)):
        logger.warning(
            "energy inequality violated: omega |v|^2 = %.6e > (j|v) = %.6e",
            config.omega * vnorm2,
            yank_dot,
        )
    field = VelocityField(config.kernel, points, momenta)
    return field, {"vnorm2": vnorm2, "yank_dot": yank_dot}


def run_simulation(config, mesh, p0):
    """Integrate the coupled system from the identity state.

    Per step: assemble the yank from the current (state, density), assemble
    the elastic matrix, solve for the velocity, advance the flow, then step
    the density on the updated state. Optional Picard sub-iterations
    (config.inner_iters > 1) re-solve the velocity against the tentative
    end-of-step state. Snapshots are recorded every config.output.every
    steps. Deterministic for a fixed configuration.
    """
    state = DeformationState.identity(mesh)
    tau = DensityField(np.asarray(p0.values, dtype=np.float64).copy())
    if len(tau.values) != mesh.n_nodes:
        raise ParameterError("initial potential does not match the mesh")

    trajectory = Trajectory()
    trajectory.append(0.0, state, tau.copy())
    trajectory.diagnostics.append(_diagnostic(mesh, state, 0.0, 0.0))

    try:
        for step in range(config.n_steps):
            field, info = _solve_step(mesh, state, tau, config)
            if field is not None:
                for _ in range(config.inner_iters - 1):
                    tentative = advance_flow(state, field, config.dt)
                    refined, refined_info = _solve_step(mesh, tentative, tau, config)
                    if refined is None:
                        break
                    field, info = refined, refined_info
            if field is None:
                new_state = replace(state, time=state.time + config.dt)
            else:
                new_state = advance_flow(state, field, config.dt)
            stepper = DensityStepper(
                mesh, new_state, config.diffusion, config.reaction, config.dt
            )
            tau = stepper.step(tau)
            state = new_state
            trajectory.diagnostics.append(
                _diagnostic(mesh, state, info["vnorm2"], info["yank_dot"])
            )
            if (step + 1) % config.output.every == 0 or step + 1 == config.n_steps:
                trajectory.append(state.time, state, tau.copy())
    except DegenerateDeformationError as exc:
        raise DiffeomorphismError(str(exc), partial_trajectory=trajectory) from exc
    return trajectory


def _diagnostic(mesh, state, vnorm2, yank_dot):
    return {
        "time": state.time,
        "min_jac": float(np.min(state.jac)),
        "area": float(np.sum(mesh.triangle_areas(state.positions))),
        "vnorm2": vnorm2,
        "yank_dot": yank_dot,
    }
