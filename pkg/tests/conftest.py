import sys

import numpy as np
import pytest

import morphoflow as mf


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\nACCEPTANCE {name}: {report.outcome.upper()}", file=sys.stderr)


@pytest.fixture(scope="session")
def ellipse_mesh():
    """The reference ellipse at working resolution."""
    return mf.make_ellipse_mesh((1.0, 0.6), 0.07)


@pytest.fixture(scope="session")
def coarse_mesh():
    """Small mesh for the dense/expensive operator tests."""
    return mf.make_ellipse_mesh((1.0, 0.6), 0.12)


def random_kernel_state(mesh, seed, amplitude=0.05, sigma=0.35, steps=4, dt=0.25):
    """A smooth, guaranteed-diffeomorphic state: flow of a random kernel field.

    Control points sit on a coarse grid over the domain's bounding box; the
    state carries exact (flow-integrated) gradients.
    """
    rng = np.random.default_rng(seed)
    lo = mesh.nodes.min(axis=0) - 0.2
    hi = mesh.nodes.max(axis=0) + 0.2
    gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], 6), np.linspace(lo[1], hi[1], 5))
    points = np.column_stack([gx.ravel(), gy.ravel()])
    momenta = amplitude * rng.standard_normal(points.shape)
    field = mf.VelocityField(mf.KernelSpec(sigma=sigma), points, momenta)
    state = mf.DeformationState.identity(mesh)
    for _ in range(steps):
        state = mf.advance_flow(state, field, dt)
    return state
