"""Frame-sequence rendering: filled triangulation colored by the Eulerian
potential, boundary polyline overlaid, one PNG per snapshot."""

import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import matplotlib.tri as mtri
import numpy as np

from .io import PlotsError, discover_frames, read_boundary, read_mesh_triangles, read_snapshot


def render_frames(trajectory_dir, out_dir, colormap_limits=None):
    """Render every snapshot of a trajectory with one shared color scale.

    Returns the list of written image paths. Corrupt snapshots are skipped
    with a warning; if every snapshot fails, PlotsError is raised.
    """
    frameset = discover_frames(trajectory_dir)
    triangles = read_mesh_triangles(frameset.mesh_path)
    os.makedirs(out_dir, exist_ok=True)

    loaded = []
    for time, snap_path, bnd_path in frameset.frames:
        try:
            snap = read_snapshot(snap_path)
            boundary = read_boundary(bnd_path)
            loaded.append((time, snap, boundary))
        except (PlotsError, OSError, ValueError) as exc:
            print(f"warning: skipping {snap_path}: {exc}", file=sys.stderr)
    if not loaded:
        raise PlotsError("all snapshots failed to load")

    if colormap_limits is not None:
        vmin, vmax = colormap_limits
    else:
        vmin = min(snap["p"].min() for _, snap, _ in loaded)
        vmax = max(snap["p"].max() for _, snap, _ in loaded)
        if vmax <= vmin:
            vmax = vmin + 1.0

    xs = np.concatenate([snap["x"] for _, snap, _ in loaded])
    ys = np.concatenate([snap["y"] for _, snap, _ in loaded])
    pad = 0.05 * max(np.ptp(xs), np.ptp(ys), 1e-9)
    xlim = (xs.min() - pad, xs.max() + pad)
    ylim = (ys.min() - pad, ys.max() + pad)

    with open(os.path.join(out_dir, "colorscale.txt"), "w") as f:
        f.write(f"vmin = {vmin:.17g}\nvmax = {vmax:.17g}\n")

    paths = []
    for index, (time, snap, boundary) in enumerate(loaded):
        fig, ax = plt.subplots(figsize=(5.0, 4.0), dpi=110)
        tri = mtri.Triangulation(snap["x"], snap["y"], triangles)
        ax.tripcolor(tri, snap["p"], shading="gouraud", vmin=vmin, vmax=vmax,
                     cmap="viridis")
        closed = np.vstack([boundary, boundary[:1]])
        ax.plot(closed[:, 0], closed[:, 1], color="black", linewidth=1.0)
        ax.set_xlim(*xlim)
        ax.set_ylim(*ylim)
        ax.set_aspect("equal")
        ax.set_title(f"t = {time:g}")
        out_path = os.path.join(out_dir, f"frame_{index:04d}.png")
        fig.savefig(out_path, metadata={"Software": None})
        plt.close(fig)
        paths.append(out_path)
    return paths
