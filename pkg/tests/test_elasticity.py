import numpy as np
import pytest
import scipy.linalg as sla

import morphoflow as mf
from conftest import random_kernel_state
from morphoflow.elasticity import _deformed_quadrature

PARAMS = mf.ElasticParams(lam=0.0, mu=1.0)
KSPEC = mf.KernelSpec(sigma=0.2)


class AffineField:
    """v(x) = M x + b with exact Jacobian; stands in for idealized fields."""

    def __init__(self, matrix, shift=(0.0, 0.0)):
        self.matrix = np.asarray(matrix, dtype=float)
        self.shift = np.asarray(shift, dtype=float)

    def evaluate(self, queries):
        queries = np.asarray(queries)
        vals = queries @ self.matrix.T + self.shift
        jacs = np.broadcast_to(self.matrix, (len(queries), 2, 2)).copy()
        return vals, jacs


def fitted_field(mesh, target_fn, sigma=0.5, margin=0.6, shape=(14, 10)):
    """Kernel field interpolating target_fn on a grid around the domain."""
    spec = mf.KernelSpec(sigma=sigma)
    lo = mesh.nodes.min(axis=0) - margin
    hi = mesh.nodes.max(axis=0) + margin
    gx, gy = np.meshgrid(
        np.linspace(lo[0], hi[0], shape[0]), np.linspace(lo[1], hi[1], shape[1])
    )
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    g = mf.gram_matrix(pts, spec)
    momenta = sla.solve(g, target_fn(pts), assume_a="pos")
    return mf.VelocityField(spec, pts, momenta)


def random_field(seed, n=8, sigma=0.3):
    rng = np.random.default_rng(seed)
    pts = rng.uniform([-1.1, -0.7], [1.1, 0.7], size=(n, 2))
    return mf.VelocityField(mf.KernelSpec(sigma=sigma), pts, rng.standard_normal((n, 2)))


# -- elastic_pairing -----------------------------------------------------------


def test_translation_field_has_negligible_energy(coarse_mesh):
    state = mf.DeformationState.identity(coarse_mesh)
    v = fitted_field(coarse_mesh, lambda x: np.tile([0.8, 0.6], (len(x), 1)))
    shear = fitted_field(coarse_mesh, lambda x: np.column_stack([x[:, 1], x[:, 0]]))
    e_v = mf.elastic_pairing(coarse_mesh, state, PARAMS, v, v)
    e_shear = mf.elastic_pairing(coarse_mesh, state, PARAMS, shear, shear)
    assert e_v <= 1e-3 * e_shear


def test_rotation_field_has_negligible_energy(coarse_mesh):
    state = mf.DeformationState.identity(coarse_mesh)
    rot = fitted_field(coarse_mesh, lambda x: np.column_stack([-x[:, 1], x[:, 0]]))
    shear = fitted_field(coarse_mesh, lambda x: np.column_stack([x[:, 1], x[:, 0]]))
    e_rot = mf.elastic_pairing(coarse_mesh, state, PARAMS, rot, rot)
    e_shear = mf.elastic_pairing(coarse_mesh, state, PARAMS, shear, shear)
    assert e_rot <= 1e-3 * e_shear


def test_identity_gradient_energy_is_four_area(coarse_mesh):
    # Dv = I: integrand = 2 mu tr(eps^T eps) = 4 with mu = 1, lambda = 0
    state = mf.DeformationState.identity(coarse_mesh)
    v = AffineField(np.eye(2))
    area = coarse_mesh.triangle_areas().sum()
    pairing = mf.elastic_pairing(coarse_mesh, state, PARAMS, v, v)
    assert pairing == pytest.approx(4.0 * area, rel=1e-12)


def test_lambda_term_dilation(coarse_mesh):
    # Dv = I: tr(eps)^2 = 4, so pairing = (4 lam + 4 mu) * area
    state = mf.DeformationState.identity(coarse_mesh)
    params = mf.ElasticParams(lam=0.7, mu=1.0)
    v = AffineField(np.eye(2))
    area = coarse_mesh.triangle_areas().sum()
    pairing = mf.elastic_pairing(coarse_mesh, state, params, v, v)
    assert pairing == pytest.approx((4.0 * 0.7 + 4.0) * area, rel=1e-12)


def test_pairing_symmetry(coarse_mesh):
    state = random_kernel_state(coarse_mesh, 4)
    v, w = random_field(1), random_field(2)
    a = mf.elastic_pairing(coarse_mesh, state, PARAMS, v, w)
    b = mf.elastic_pairing(coarse_mesh, state, PARAMS, w, v)
    assert a == pytest.approx(b, rel=1e-12)


def test_pairing_matches_finite_difference_oracle(ellipse_mesh):
    # independent quadrature oracle: strains from central differences of the
    # field values only (no analytic kernel derivatives)
    state = mf.DeformationState.identity(ellipse_mesh)
    params = mf.ElasticParams(lam=0.4, mu=1.3)
    v, w = random_field(10), random_field(20)
    qpts, qw = _deformed_quadrature(ellipse_mesh, state)
    h = 1e-5

    def fd_jacobians(field):
        jac = np.empty((len(qpts), 2, 2))
        for c in range(2):
            dq = np.zeros(2)
            dq[c] = h
            vp, _ = field.evaluate(qpts + dq)
            vm, _ = field.evaluate(qpts - dq)
            jac[:, :, c] = (vp - vm) / (2 * h)
        return jac

    def strain(jac):
        return 0.5 * (jac + np.transpose(jac, (0, 2, 1)))

    eps_v, eps_w = strain(fd_jacobians(v)), strain(fd_jacobians(w))
    integrand = params.lam * np.trace(eps_v, axis1=1, axis2=2) * np.trace(
        eps_w, axis1=1, axis2=2
    ) + 2.0 * params.mu * np.einsum("qij,qij->q", eps_v, eps_w)
    oracle = float(np.sum(qw * integrand))
    pairing = mf.elastic_pairing(ellipse_mesh, state, params, v, w)
    assert pairing == pytest.approx(oracle, rel=1e-6)


def test_pairing_rejects_degenerate_state(coarse_mesh):
    state = mf.DeformationState.identity(coarse_mesh)
    state.jac[3] = -0.5
    with pytest.raises(mf.DegenerateDeformationError):
        mf.elastic_pairing(coarse_mesh, state, PARAMS, random_field(0), random_field(1))


# -- assemble_elastic_matrix -----------------------------------------------------


def test_far_control_point_gives_zero_block(coarse_mesh):
    state = mf.DeformationState.identity(coarse_mesh)
    far = np.array([[30.0, 0.0]])  # ~145 sigma from the domain
    a = mf.assemble_elastic_matrix(coarse_mesh, state, PARAMS, far, KSPEC)
    assert np.max(np.abs(a)) <= 1e-12


def test_matrix_symmetry(coarse_mesh):
    state = random_kernel_state(coarse_mesh, 8)
    points = state.positions[::5]
    a = mf.assemble_elastic_matrix(coarse_mesh, state, PARAMS, points, KSPEC)
    assert np.max(np.abs(a - a.T)) <= 1e-10


def test_matrix_positive_semidefinite(coarse_mesh):
    state = mf.DeformationState.identity(coarse_mesh)
    points = state.positions[::4]
    a = mf.assemble_elastic_matrix(coarse_mesh, state, PARAMS, points, KSPEC)
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = rng.standard_normal(a.shape[0])
        assert x @ a @ x >= -1e-10 * (x @ x)


def test_quadratic_form_consistent_with_pairing(coarse_mesh):
    state = random_kernel_state(coarse_mesh, 5)
    points = state.positions[::6]
    params = mf.ElasticParams(lam=0.3, mu=0.9)
    a = mf.assemble_elastic_matrix(coarse_mesh, state, params, points, KSPEC)
    rng = np.random.default_rng(12)
    momenta = rng.standard_normal((len(points), 2))
    v = mf.VelocityField(KSPEC, points, momenta)
    direct = mf.elastic_pairing(coarse_mesh, state, params, v, v)
    quadratic = float(momenta.ravel() @ a @ momenta.ravel())
    assert quadratic == pytest.approx(direct, rel=1e-10)


def test_lipschitz_trend_in_state(coarse_mesh):
    # ||A(phi_eps) - A(phi)|| grows about linearly in the perturbation size
    state = mf.DeformationState.identity(coarse_mesh)
    points = coarse_mesh.nodes[::6]
    base = mf.assemble_elastic_matrix(coarse_mesh, state, PARAMS, points, KSPEC)
    rng = np.random.default_rng(3)
    direction = rng.standard_normal(state.positions.shape)
    direction /= np.max(np.abs(direction))
    deltas = []
    eps_list = [1e-3, 2e-3, 4e-3, 8e-3]
    for eps in eps_list:
        pert = mf.DeformationState(
            state.positions + eps * direction,
            state.grad.copy(),
            state.jac.copy(),
            0.0,
        )
        a = mf.assemble_elastic_matrix(coarse_mesh, pert, PARAMS, points, KSPEC)
        deltas.append(np.max(np.abs(a - base)))
    assert all(d1 < d2 for d1, d2 in zip(deltas, deltas[1:]))
    # doubling eps should no more than ~triple the deviation (linear trend)
    for d1, d2 in zip(deltas, deltas[1:]):
        assert d2 <= 3.0 * d1


def test_elastic_params_validation():
    with pytest.raises(mf.ParameterError):
        mf.ElasticParams(lam=0.0, mu=0.0)
    with pytest.raises(mf.ParameterError):
        mf.ElasticParams(lam=-1.0, mu=1.0)
