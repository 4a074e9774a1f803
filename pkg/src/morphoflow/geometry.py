"""Reference mesh, deformation-state bookkeeping, and nodal field utilities.

The reference domain is a triangulated 2D region. Deformations are tracked
nodewise: positions phi(t, x_i), deformation gradients Dphi(t, x_i) and their
determinants. All area integrals in the package use the same 3-point
(order-2) quadrature rule per triangle provided here.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDeformationError, InvalidMeshError, ParameterError

# barycentric coordinates and weights of the interior 3-point, degree-2 rule
_QUAD_BARY = np.array(
    [
        [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    ]
)


class Mesh:
    """Triangulated reference domain with an oriented boundary.

    Parameters
    ----------
    nodes : (n, 2) float array
        Node coordinates.
    triangles : (t, 3) int array
        Node index triples, counterclockwise.
    boundary_edges : (b, 2) int array
        Directed boundary edges (i, j) with the domain on the left, so the
        outward normal is the edge vector rotated by -90 degrees.
    """

    def __init__(self, nodes, triangles, boundary_edges):
        self.nodes = np.ascontiguousarray(nodes, dtype=np.float64)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        self.boundary_edges = np.ascontiguousarray(boundary_edges, dtype=np.int64)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 2:
            raise InvalidMeshError("nodes must have shape (n, 2)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise InvalidMeshError("triangles must have shape (t, 3)")
        if self.boundary_edges.ndim != 2 or self.boundary_edges.shape[1] != 2:
            raise InvalidMeshError("boundary_edges must have shape (b, 2)")
        self._validate()

    # -- structural checks -------------------------------------------------

    def _validate(self):
        n = len(self.nodes)
        if self.triangles.min(initial=0) < 0 or self.triangles.max(initial=-1) >= n:
            raise InvalidMeshError("triangle index out of range")
        areas = self.triangle_areas()
        if np.any(areas <= 0.0):
            bad = int(np.argmin(areas))
            raise InvalidMeshError(
                f"triangle {bad} has non-positive signed area {areas[bad]:g}"
            )

        # every directed boundary edge must appear in exactly one triangle,
        # traversed in the triangle's CCW order
        directed = set()
        edge_count = {}
        for tri in self.triangles:
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                directed.add((int(a), int(b)))
                key = (int(min(a, b)), int(max(a, b)))
                edge_count[key] = edge_count.get(key, 0) + 1
        if any(c > 2 for c in edge_count.values()):
            raise InvalidMeshError("an edge is shared by more than two triangles")

        hull = {k for k, c in edge_count.items() if c == 1}
        given = {(int(min(i, j)), int(max(i, j))) for i, j in self.boundary_edges}
        if hull != given:
            raise InvalidMeshError(
                "boundary_edges do not match the set of once-used triangle edges"
            )
        for i, j in self.boundary_edges:
            if (int(i), int(j)) not in directed:
                raise InvalidMeshError(
                    f"boundary edge ({i}, {j}) is oriented against its triangle"
                )

        # closed loops: each boundary node has exactly one outgoing and one
        # incoming directed boundary edge
        src = {}
        dst = {}
        for i, j in self.boundary_edges:
            if int(i) in src or int(j) in dst:
                raise InvalidMeshError("boundary edges do not form simple loops")
            src[int(i)] = int(j)
            dst[int(j)] = int(i)
        if set(src) != set(dst):
            raise InvalidMeshError("boundary edges do not form closed loops")

    # -- geometric quantities ----------------------------------------------

    def coords(self, positions=None):
        return self.nodes if positions is None else np.asarray(positions)

    def triangle_areas(self, positions=None):
        """Signed areas of the triangles, using deformed positions if given."""
        p = self.coords(positions)[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def basis_gradients(self, positions=None):
        """Constant gradients of the P1 basis per triangle, shape (t, 3, 2)."""
        p = self.coords(positions)[self.triangles]
        areas = self.triangle_areas(positions)
        g = np.empty((len(self.triangles), 3, 2))
        for loc in range(3):
            e = p[:, (loc + 2) % 3] - p[:, (loc + 1) % 3]
            g[:, loc, 0] = -e[:, 1]
            g[:, loc, 1] = e[:, 0]
        return g / (2.0 * areas)[:, None, None]

    def quadrature(self, positions=None):
        """Interior 3-point rule: points (3t, 2) and weights (3t,).

        Weights sum to the (possibly deformed) mesh area; the rule is exact
        for quadratic integrands on each triangle.
        """
        p = self.coords(positions)[self.triangles]  # (t, 3, 2)
        pts = np.einsum("qv,tvd->tqd", _QUAD_BARY, p).reshape(-1, 2)
        areas = self.triangle_areas(positions)
        w = np.repeat(areas / 3.0, 3)
        return pts, w

    def interpolate_at_quadrature(self, values):
        """P1 interpolation of nodal values at the 3-point rule points."""
        v = np.asarray(values)[self.triangles]  # (t, 3)
        return (v @ _QUAD_BARY.T).reshape(-1)

    def boundary_loop(self):
        """Ordered node indices of the boundary loop (single-loop meshes)."""
        nxt = {int(i): int(j) for i, j in self.boundary_edges}
        start = min(nxt)
        loop = [start]
        cur = nxt[start]
        while cur != start:
            loop.append(cur)
            cur = nxt[cur]
        if len(loop) != len(self.boundary_edges):
            raise InvalidMeshError("boundary has more than one loop")
        return np.array(loop, dtype=np.int64)

    @property
    def n_nodes(self):
        return len(self.nodes)


@dataclass
class DeformationState:
    """Nodal snapshot of the flow: positions, gradients, Jacobians, time."""

    positions: np.ndarray  # (n, 2)
    grad: np.ndarray  # (n, 2, 2)
    jac: np.ndarray  # (n,)
    time: float = 0.0

    @classmethod
    def identity(cls, mesh):
        n = mesh.n_nodes
        return cls(
            positions=mesh.nodes.copy(),
            grad=np.broadcast_to(np.eye(2), (n, 2, 2)).copy(),
            jac=np.ones(n),
            time=0.0,
        )

    def require_valid(self):
        det = np.linalg.det(self.grad)
        if not np.allclose(det, self.jac, rtol=1e-12, atol=1e-14):
            raise DegenerateDeformationError("jac is inconsistent with det(grad)")
        if np.any(self.jac <= 0.0):
            bad = int(np.argmin(self.jac))
            raise DegenerateDeformationError(
                f"non-positive Jacobian {self.jac[bad]:g} at node {bad} "
                f"(t = {self.time:g})"
            )


@dataclass
class DensityField:
    """Nodal Lagrangian density on the reference mesh."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ParameterError("density values must be a 1D array")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("density values must be finite")

    def copy(self):
        return DensityField(self.values.copy())


# --------------------------------------------------------------------------
# mesh generation


def _ellipse_perimeter(a, b):
    # Ramanujan's approximation
    h = (a - b) ** 2 / (a + b) ** 2
    return np.pi * (a + b) * (1.0 + 3.0 * h / (10.0 + np.sqrt(4.0 - 3.0 * h)))


def make_ellipse_mesh(semi_axes, target_edge_length):
    """Structured triangulation of an ellipse.

    A unit disk is triangulated with concentric rings (ring i carries 6*i
    nodes, staggered every other ring) and then scaled by the semi-axes.
    Maximum edge length stays below twice the target.
    """
    a, b = float(semi_axes[0]), float(semi_axes[1])
    e = float(target_edge_length)
    if not (np.isfinite(a) and np.isfinite(b)) or a <= 0.0 or b <= 0.0:
        raise ParameterError("semi_axes must be positive and finite")
    if not np.isfinite(e) or e <= 0.0 or e >= min(a, b):
        raise ParameterError(
            "target_edge_length must be positive and smaller than the minor semi-axis"
        )

    h = e / max(a, b)
    rings = int(np.ceil(1.0 / h))
    nodes = [(0.0, 0.0)]
    ring_start = [None]  # 1-based ring index -> first node id
    for i in range(1, rings + 1):
        ring_start.append(len(nodes))
        count = 6 * i
        offset = 0.5 * (i % 2)
        theta = 2.0 * np.pi * (np.arange(count) + offset) / count
        rho = i / rings
        nodes.extend(zip(rho * np.cos(theta), rho * np.sin(theta)))
    nodes = np.array(nodes)

    def ring_ids(i):
        return np.arange(ring_start[i], ring_start[i] + 6 * i)

    def ring_angles(i):
        count = 6 * i
        return 2.0 * np.pi * (np.arange(count) + 0.5 * (i % 2)) / count

    triangles = []
    first = ring_ids(1)
    for k in range(6):
        triangles.append((0, first[k], first[(k + 1) % 6]))

    for i in range(1, rings):
        inner, outer = ring_ids(i), ring_ids(i + 1)
        ain, aout = ring_angles(i), ring_angles(i + 1)
        ni, no = len(inner), len(outer)
        # two-pointer merge around both rings by angle
        p = q = 0
        while p < ni or q < no:
            next_in = ain[(p + 1) % ni] + (2.0 * np.pi if p + 1 >= ni else 0.0)
            next_out = aout[(q + 1) % no] + (2.0 * np.pi if q + 1 >= no else 0.0)
            if q >= no or (p < ni and next_in <= next_out):
                triangles.append(
                    (inner[p % ni], outer[q % no], inner[(p + 1) % ni])
                )
                p += 1
            else:
                triangles.append(
                    (inner[p % ni], outer[q % no], outer[(q + 1) % no])
                )
                q += 1
    triangles = np.array(triangles, dtype=np.int64)

    # orient CCW before scaling (scaling by positive axes preserves sign)
    p = nodes[triangles]
    s = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (
        p[:, 1, 1] - p[:, 0, 1]
    ) * (p[:, 2, 0] - p[:, 0, 0])
    flip = s < 0.0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]

    outer = ring_ids(rings)
    boundary = np.stack([outer, np.roll(outer, -1)], axis=1)

    nodes[:, 0] *= a
    nodes[:, 1] *= b
    return Mesh(nodes, triangles, boundary)


# --------------------------------------------------------------------------
# nodal field operations


def eulerian_density(state, tau):
    """Eulerian density at the material points: p(phi(x_i)) = tau_i / jac_i."""
    values = np.asarray(tau.values)
    if len(values) != len(state.jac):
        raise ParameterError("density and state live on different meshes")
    if np.any(state.jac <= 0.0):
        raise DegenerateDeformationError("state has non-positive Jacobians")
    return values / state.jac


def recover_gradient(values, mesh):
    """Lumped-mass L2 projection of element gradients onto the nodes.

    Exact for globally affine fields.
    """
    values = np.asarray(values, dtype=np.float64)
    if len(values) != mesh.n_nodes:
        raise ParameterError("field length does not match the mesh")
    grads = mesh.basis_gradients()  # (t, 3, 2)
    areas = mesh.triangle_areas()
    elem_grad = np.einsum("tv,tvd->td", values[mesh.triangles], grads)
    weighted = elem_grad * areas[:, None] / 3.0

    num = np.zeros((mesh.n_nodes, 2))
    den = np.zeros(mesh.n_nodes)
    for loc in range(3):
        np.add.at(num, mesh.triangles[:, loc], weighted)
        np.add.at(den, mesh.triangles[:, loc], areas / 3.0)
    return num / den[:, None]


# --------------------------------------------------------------------------
# plain-text mesh and snapshot formats


def write_mesh(mesh, path):
    """Line-oriented format: `v x y`, `t i j k`, `b i j` (zero-based)."""
    with open(path, "w") as f:
        for x, y in mesh.nodes:
            f.write(f"v {x:.17g} {y:.17g}\n")
        for i, j, k in mesh.triangles:
            f.write(f"t {i} {j} {k}\n")
        for i, j in mesh.boundary_edges:
            f.write(f"b {i} {j}\n")


def read_mesh(path):
    nodes, tris, bnd = [], [], []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            tag, rest = parts[0], parts[1:]
            if tag == "v" and len(rest) == 2:
                nodes.append((float(rest[0]), float(rest[1])))
            elif tag == "t" and len(rest) == 3:
                tris.append(tuple(int(r) for r in rest))
            elif tag == "b" and len(rest) == 2:
                bnd.append(tuple(int(r) for r in rest))
            else:
                raise InvalidMeshError(f"{path}:{lineno}: malformed line {line!r}")
    return Mesh(np.array(nodes), np.array(tris), np.array(bnd))


def write_snapshot(path, state, tau):
    """Per-step nodal CSV: node, deformed x/y, Lagrangian tau, Eulerian p."""
    p = np.asarray(tau.values) / state.jac
    with open(path, "w") as f:
        f.write("node,x,y,tau,p\n")
        for i in range(len(state.positions)):
            x, y = state.positions[i]
            f.write(f"{i},{x:.17g},{y:.17g},{tau.values[i]:.17g},{p[i]:.17g}\n")


def read_snapshot(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}
