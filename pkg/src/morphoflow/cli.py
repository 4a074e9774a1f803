"""Command-line entry points: simulate, gridsearch, mesh.

Configuration is a line-oriented ``key = value`` file with dotted keys.
Unknown keys are rejected (no silent typos); all defaults are documented in
the key table below. Outputs are plain text: per-step snapshot CSVs,
boundary polylines, a mesh file, and a key-value manifest with checksums.
"""

import argparse
import hashlib
import os
import sys
import time

import numpy as np

from .coupling import (
    MeshParams,
    OutputParams,
    PotentialParams,
    SimulationConfig,
    run_simulation,
)
from .elasticity import ElasticParams
from .errors import ConfigError, DiffeomorphismError, MorphoflowError, ParameterError
from .geometry import make_ellipse_mesh, write_mesh, write_snapshot
from .reaction_diffusion import BumpProfile, DiffusionSpec, initial_potential
from .rkhs import KernelSpec
from .varifold import VarifoldSpec, grid_search_center

# key -> (default, type, validator description, validator)
_POSITIVE = ("must be > 0", lambda v: v > 0)
_NONNEG = ("must be >= 0", lambda v: v >= 0)
_ANY = ("", lambda v: True)

CONFIG_KEYS = {
    "mesh.semi_axis_x": (1.0, float, *_POSITIVE),
    "mesh.semi_axis_y": (0.6, float, *_POSITIVE),
    "mesh.edge_length": (0.075, float, *_POSITIVE),
    "kernel.sigma": (0.2, float, *_POSITIVE),
    "solver.omega": (2.0, float, *_POSITIVE),
    "elastic.lambda": (0.0, float, *_NONNEG),
    "elastic.mu": (1.0, float, *_POSITIVE),
    "diffusion.rx": (0.025, float, *_POSITIVE),
    "diffusion.ry": (0.005, float, *_POSITIVE),
    "reaction.shape": ("symmetric_bump", str, *_ANY),
    "reaction.p_min": (0.01, float, *_ANY),
    "reaction.p_max": (1.0, float, *_ANY),
    "reaction.height": (1.0, float, *_POSITIVE),
    "yank.shape": ("plateau_bump", str, *_ANY),
    "yank.p_min": (0.01, float, *_ANY),
    "yank.p_max": (1.0, float, *_ANY),
    "yank.height": (1.0, float, *_POSITIVE),
    "potential.cx": (-0.5, float, *_ANY),
    "potential.cy": (0.3, float, *_ANY),
    "potential.radius": (0.4, float, *_POSITIVE),
    "potential.height": (0.8, float, *_POSITIVE),
    "time.dt": (0.25, float, *_POSITIVE),
    "time.T": (25.0, float, *_POSITIVE),
    "output.dir": ("out", str, *_ANY),
    "output.every": (1, int, *_POSITIVE),
    "coupling.inner_iters": (2, int, *_POSITIVE),
    "varifold.sigma_w": (0.3, float, *_POSITIVE),
}


def _parse_value(key, raw, lineno, path):
    default, typ, rule, check = CONFIG_KEYS[key]
    try:
        value = typ(raw)
    except ValueError:
        raise ConfigError(
            f"{path}:{lineno}: value {raw!r} for {key} is not a valid {typ.__name__}"
        )
    if not check(value):
        raise ConfigError(f"{path}:{lineno}: {key} {rule} (got {value!r})")
    return value


def read_config_table(path):
    """Parse a config file into a complete key -> value table."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    table = {key: default for key, (default, *_rest) in CONFIG_KEYS.items()}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in stripped.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            table[key] = _parse_value(key, raw, lineno, path)
    return table


def config_from_table(table):
    try:
        return SimulationConfig(
            omega=table["solver.omega"],
            kernel=KernelSpec(sigma=table["kernel.sigma"]),
            elastic=ElasticParams(lam=table["elastic.lambda"], mu=table["elastic.mu"]),
            diffusion=DiffusionSpec(rates=(table["diffusion.rx"], table["diffusion.ry"])),
            reaction=BumpProfile(
                table["reaction.p_min"],
                table["reaction.p_max"],
                table["reaction.height"],
                table["reaction.shape"],
            ),
            yank=BumpProfile(
                table["yank.p_min"],
                table["yank.p_max"],
                table["yank.height"],
                table["yank.shape"],
            ),
            dt=table["time.dt"],
            T=table["time.T"],
            output=OutputParams(
                directory=table["output.dir"], every=table["output.every"]
            ),
            mesh=MeshParams(
                semi_axes=(table["mesh.semi_axis_x"], table["mesh.semi_axis_y"]),
                edge_length=table["mesh.edge_length"],
            ),
            potential=PotentialParams(
                center=(table["potential.cx"], table["potential.cy"]),
                radius=table["potential.radius"],
                height=table["potential.height"],
            ),
            inner_iters=table["coupling.inner_iters"],
            varifold_sigma_w=table["varifold.sigma_w"],
        )
    except ParameterError as exc:
        raise ConfigError(str(exc))


def parse_config(path):
    """Parse a config file into a SimulationConfig (unknown keys rejected)."""
    return config_from_table(read_config_table(path))


def config_to_table(config):
    """Flatten a SimulationConfig back to the key -> value table."""
    return {
        "mesh.semi_axis_x": config.mesh.semi_axes[0],
        "mesh.semi_axis_y": config.mesh.semi_axes[1],
        "mesh.edge_length": config.mesh.edge_length,
        "kernel.sigma": config.kernel.sigma,
        "solver.omega": config.omega,
        "elastic.lambda": config.elastic.lam,
        "elastic.mu": config.elastic.mu,
        "diffusion.rx": config.diffusion.rates[0],
        "diffusion.ry": config.diffusion.rates[1],
        "reaction.shape": config.reaction.shape,
        "reaction.p_min": config.reaction.p_min,
        "reaction.p_max": config.reaction.p_max,
        "reaction.height": config.reaction.height,
        "yank.shape": config.yank.shape,
        "yank.p_min": config.yank.p_min,
        "yank.p_max": config.yank.p_max,
        "yank.height": config.yank.height,
        "potential.cx": config.potential.center[0],
        "potential.cy": config.potential.center[1],
        "potential.radius": config.potential.radius,
        "potential.height": config.potential.height,
        "time.dt": config.dt,
        "time.T": config.T,
        "output.dir": config.output.directory,
        "output.every": config.output.every,
        "coupling.inner_iters": config.inner_iters,
        "varifold.sigma_w": config.varifold_sigma_w,
    }


def write_config(config, path):
    table = config_to_table(config)
    with open(path, "w") as f:
        for key in CONFIG_KEYS:
            f.write(f"{key} = {table[key]}\n")


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_manifest(path, config, status, files, extra=None):
    lines = [f"status = {status}"]
    for key, value in (extra or {}).items():
        lines.append(f"{key} = {value}")
    for key, value in config_to_table(config).items():
        lines.append(f"config.{key} = {value}")
    for name in files:
        full = os.path.join(os.path.dirname(path), name)
        lines.append(f"file.{name} = sha256:{_sha256(full)}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_manifest(path):
    out = {}
    with open(path) as f:
        for line in f:
            if "=" in line:
                key, value = line.split("=", 1)
                out[key.strip()] = value.strip()
    return out


def _output_dir(config, override=None):
    out = override or os.environ.get("MORPHOFLOW_OUT") or config.output.directory
    os.makedirs(out, exist_ok=True)
    return out


def _write_boundary(path, curve_vertices):
    with open(path, "w") as f:
        for x, y in curve_vertices:
            f.write(f"{x:.17g} {y:.17g}\n")


def write_trajectory(trajectory, mesh, config, out_dir, status="ok", extra=None):
    """Write snapshots, boundary polylines, the mesh, and the manifest."""
    from .varifold import boundary_curve

    files = []
    write_mesh(mesh, os.path.join(out_dir, "mesh.txt"))
    files.append("mesh.txt")
    for idx, (t, state, tau) in enumerate(trajectory.entries):
        snap = f"step_{idx:04d}.csv"
        write_snapshot(os.path.join(out_dir, snap), state, tau)
        files.append(snap)
        bnd = f"boundary_{idx:04d}.txt"
        curve = boundary_curve(mesh, state.positions)
        _write_boundary(os.path.join(out_dir, bnd), curve.vertices)
        files.append(bnd)
    info = {"snapshots": len(trajectory.entries)}
    if trajectory.diagnostics:
        info["min_jac"] = min(d["min_jac"] for d in trajectory.diagnostics)
    info.update(extra or {})
    _write_manifest(
        os.path.join(out_dir, "manifest"), config, status, files, extra=info
    )


def cmd_simulate(config_path, out_override=None):
    """Run one simulation and write its trajectory. Returns an exit code."""
    try:
        config = parse_config(config_path)
        out_dir = _output_dir(config, out_override)
        mesh = make_ellipse_mesh(config.mesh.semi_axes, config.mesh.edge_length)
        p0 = initial_potential(
            np.asarray(config.potential.center),
            config.potential.radius,
            config.potential.height,
            mesh,
        )
        start = time.perf_counter()
        try:
            trajectory = run_simulation(config, mesh, p0)
        except DiffeomorphismError as exc:
            wall = time.perf_counter() - start
            if exc.partial_trajectory is not None:
                write_trajectory(
                    exc.partial_trajectory,
                    mesh,
                    config,
                    out_dir,
                    status="failed-degenerate",
                    extra={"steps": len(exc.partial_trajectory.entries) - 1,
                           "wall_time_s": f"{wall:.3f}",
                           "error": str(exc)},
                )
            print(f"error: diffeomorphism-violation: {exc}", file=sys.stderr)
            return 2
        wall = time.perf_counter() - start
        write_trajectory(
            trajectory,
            mesh,
            config,
            out_dir,
            extra={"steps": config.n_steps, "wall_time_s": f"{wall:.3f}"},
        )
        return 0
    except MorphoflowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def _parse_grid(spec):
    """Parse 'x0:x1:nx,y0:y1:ny' into the row-major list of centers."""
    try:
        xpart, ypart = spec.split(",")
        x0, x1, nx = xpart.split(":")
        y0, y1, ny = ypart.split(":")
        xs = np.linspace(float(x0), float(x1), int(nx))
        ys = np.linspace(float(y0), float(y1), int(ny))
    except ValueError:
        raise ConfigError(f"malformed grid spec {spec!r}, expected x0:x1:nx,y0:y1:ny")
    return [(float(x), float(y)) for y in ys for x in xs]


def cmd_gridsearch(config_path, grid_spec, t_prime, jobs=1, out_override=None):
    """Run the center grid search and write the landscape CSV."""
    try:
        config = parse_config(config_path)
        out_dir = _output_dir(config, out_override)
        centers = _parse_grid(grid_spec)
        spec = VarifoldSpec(sigma_w=config.varifold_sigma_w)
        start = time.perf_counter()
        rows, truth_curve = grid_search_center(
            config,
            centers,
            t_prime,
            truth_center=config.potential.center,
            spec=spec,
            jobs=jobs,
        )
        wall = time.perf_counter() - start
        csv_path = os.path.join(out_dir, "landscape.csv")
        with open(csv_path, "w") as f:
            f.write("cx,cy,distance\n")
            for row in rows:
                f.write(f"{row.center[0]:.17g},{row.center[1]:.17g},"
                        f"{row.distance:.17g}\n")
        _write_boundary(os.path.join(out_dir, "truth_boundary.txt"),
                        truth_curve.vertices)
        failed = [row for row in rows if row.error]
        _write_manifest(
            os.path.join(out_dir, "manifest"),
            config,
            "ok" if not failed else "partial",
            ["landscape.csv", "truth_boundary.txt"],
            extra={
                "t_prime": t_prime,
                "rows": len(rows),
                "failed_rows": len(failed),
                "wall_time_s": f"{wall:.3f}",
            },
        )
        return 0 if not failed else 3
    except MorphoflowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def cmd_mesh(config_path, out_override=None):
    """Emit only the mesh for the configured domain."""
    try:
        config = parse_config(config_path)
        out_dir = _output_dir(config, out_override)
        mesh = make_ellipse_mesh(config.mesh.semi_axes, config.mesh.edge_length)
        write_mesh(mesh, os.path.join(out_dir, "mesh.txt"))
        return 0
    except MorphoflowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="morphoflow",
        description="2D coupled shape-growth simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one simulation")
    p_sim.add_argument("config")
    p_sim.add_argument("--out", default=None, help="override output directory")

    p_grid = sub.add_parser("gridsearch", help="potential-center grid search")
    p_grid.add_argument("config")
    p_grid.add_argument("--grid", required=True, help="x0:x1:nx,y0:y1:ny")
    p_grid.add_argument("--tprime", type=float, required=True)
    p_grid.add_argument("--jobs", type=int, default=1)
    p_grid.add_argument("--out", default=None)

    p_mesh = sub.add_parser("mesh", help="emit the mesh only")
    p_mesh.add_argument("config")
    p_mesh.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    if args.command == "simulate":
        return cmd_simulate(args.config, out_override=args.out)
    if args.command == "gridsearch":
        return cmd_gridsearch(
            args.config, args.grid, args.tprime, jobs=args.jobs, out_override=args.out
        )
    return cmd_mesh(args.config, out_override=args.out)


if __name__ == "__main__":
    sys.exit(main())
