"""Varifold distance between boundary curves and the center grid search.

The distance uses the standard discrete unoriented-varifold inner product
with a Gaussian spatial kernel on edge midpoints and a squared tangent
kernel, so it is invariant to curve orientation and insensitive to vertex
ordering conventions.
"""

import os
from dataclasses import dataclass, replace

import numpy as np

from .coupling import run_simulation
from .errors import MorphoflowError, ParameterError
from .geometry import make_ellipse_mesh
from .reaction_diffusion import initial_potential


@dataclass(frozen=True)
class VarifoldSpec:
    """Gaussian spatial kernel width for the varifold metric."""

    sigma_w: float = 0.3

    def __post_init__(self):
        if self.sigma_w <= 0.0:
            raise ParameterError("varifold kernel width must be positive")


@dataclass
class Curve:
    """Closed polyline; the last vertex connects back to the first."""

    vertices: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise ParameterError("curve vertices must have shape (m, 2)")
        if len(self.vertices) < 3:
            raise ParameterError("a closed curve needs at least 3 vertices")
        nxt = np.roll(self.vertices, -1, axis=0)
        if np.any(np.all(nxt == self.vertices, axis=1)):
            raise ParameterError("consecutive curve vertices must be distinct")

    def edges(self):
        """Midpoints (m, 2) and edge vectors (m, 2), wrap-around included."""
        nxt = np.roll(self.vertices, -1, axis=0)
        return 0.5 * (self.vertices + nxt), nxt - self.vertices


def _inner(c1, c2, spec):
    m1, t1 = c1.edges()
    m2, t2 = c2.edges()
    d2 = np.sum((m1[:, None, :] - m2[None, :, :]) ** 2, axis=2)
    spatial = np.exp(-d2 / (spec.sigma_w**2))
    dots = t1 @ t2.T
    lens = np.linalg.norm(t1, axis=1)[:, None] * np.linalg.norm(t2, axis=1)[None, :]
    return float(np.sum(spatial * dots**2 / lens))


def varifold_distance_squared(c1, c2, spec):
    """Squared varifold distance <C1,C1> - 2 <C1,C2> + <C2,C2> (>= 0)."""
    return _inner(c1, c1, spec) - 2.0 * _inner(c1, c2, spec) + _inner(c2, c2, spec)


def varifold_distance(c1, c2, spec):
    return float(np.sqrt(max(varifold_distance_squared(c1, c2, spec), 0.0)))


def boundary_curve(mesh, positions=None):
    """Boundary loop of the mesh mapped through the given positions."""
    loop = mesh.boundary_loop()
    coords = mesh.nodes if positions is None else np.asarray(positions)
    return Curve(coords[loop])


# --------------------------------------------------------------------------
# inverse-problem landscape


@dataclass
class GridRow:
    center: tuple
    distance: float
    error: str = ""


def _final_boundary(config, mesh, center):
    p0 = initial_potential(
        np.asarray(center, dtype=np.float64),
        config.potential.radius,
        config.potential.height,
        mesh,
    )
    trajectory = run_simulation(config, mesh, p0)
    _, state, _ = trajectory.final()
    return boundary_curve(mesh, state.positions)


def _worker(args):
    config, center = args
    mesh = make_ellipse_mesh(config.mesh.semi_axes, config.mesh.edge_length)
    curve = _final_boundary(config, mesh, center)
    return curve.vertices


def _worker_init():
    # keep BLAS single-threaded inside worker processes
    os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
    os.environ.setdefault("OMP_NUM_THREADS", "1")


def grid_search_center(
    base_config, centers, t_prime, truth_center, spec=None, jobs=1
):
    """Varifold distances of candidate-center runs to the ground truth.

    Runs one simulation with the truth center and one per candidate, all to
    t_prime with otherwise identical parameters, compares the final
    boundary curves, and returns (rows, truth_curve). Failures of single
    candidates are recorded in their row; the search continues.
    """
    if len(centers) == 0:
        raise ParameterError("centers must be nonempty")
    if t_prime > base_config.T + 1e-12:
        raise ParameterError("t_prime must not exceed the configured horizon")
    spec = spec or VarifoldSpec()
    config = replace(base_config, T=t_prime)

    def task_for(center):
        return (
            replace(config, potential=replace(config.potential, center=tuple(center))),
            tuple(center),
        )

    # the truth run goes through the same execution path (task 0) so that a
    # candidate equal to the truth center reproduces it bitwise
    tasks = [task_for(truth_center)] + [task_for(c) for c in centers]
    results = [None] * len(tasks)
    if jobs > 1:
        import multiprocessing as mp

        ctx = mp.get_context("spawn")
        with ctx.Pool(processes=jobs, initializer=_worker_init) as pool:
            async_results = [pool.apply_async(_worker, (t,)) for t in tasks]
            for i, ar in enumerate(async_results):
                try:
                    results[i] = ar.get()
                except Exception as exc:  # noqa: BLE001 - recorded per row
                    results[i] = exc
    else:
        for i, task in enumerate(tasks):
            try:
                results[i] = _worker(task)
            except MorphoflowError as exc:
                results[i] = exc

    if isinstance(results[0], Exception):
        raise MorphoflowError(f"ground-truth simulation failed: {results[0]}")
    truth_curve = Curve(results[0])

    rows = []
    for center, result in zip(centers, results[1:]):
        if isinstance(result, Exception):
            rows.append(GridRow(tuple(center), float("nan"), str(result)))
        else:
            d = varifold_distance(Curve(result), truth_curve, spec)
            rows.append(GridRow(tuple(center), d))
    return rows, truth_curve
