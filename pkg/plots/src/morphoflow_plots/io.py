"""Readers for the simulator's plain-text output formats.

These duplicate nothing from the simulator package on purpose: the
rendering side consumes only the documented files (mesh.txt, step_*.csv,
boundary_*.txt, manifest, landscape.csv).
"""

import os
import re
from dataclasses import dataclass

import numpy as np


class PlotsError(Exception):
    pass


def read_manifest(path):
    if not os.path.isfile(path):
        raise PlotsError(f"manifest not found: {path}")
    out = {}
    with open(path) as f:
        for line in f:
            if "=" in line:
                key, value = line.split("=", 1)
                out[key.strip()] = value.strip()
    return out


def read_mesh_triangles(path):
    """Triangle index triples from a `v/t/b` mesh file."""
    tris = []
    with open(path) as f:
        for line in f:
            parts = line.split()
            if parts and parts[0] == "t":
                tris.append([int(parts[1]), int(parts[2]), int(parts[3])])
    if not tris:
        raise PlotsError(f"no triangles in mesh file {path}")
    return np.array(tris)


def read_snapshot(path):
    """Columns of a `node,x,y,tau,p` snapshot CSV."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.dtype.names is None or "p" not in data.dtype.names:
        raise PlotsError(f"snapshot {path} lacks the expected columns")
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}


def read_boundary(path):
    verts = np.loadtxt(path)
    if verts.ndim != 2 or verts.shape[1] != 2:
        raise PlotsError(f"boundary file {path} is not an x-y polyline")
    return verts


@dataclass
class FrameSet:
    """Ordered frames of one trajectory: (time, snapshot path, boundary path)."""

    frames: list
    mesh_path: str

    def __post_init__(self):
        times = [t for t, _, _ in self.frames]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise PlotsError("frame times must be strictly increasing")
        for _, snap, bnd in self.frames:
            if not os.path.isfile(snap) or not os.path.isfile(bnd):
                raise PlotsError(f"missing frame files: {snap}, {bnd}")


def discover_frames(trajectory_dir):
    """Build a FrameSet from a trajectory directory with a valid manifest."""
    manifest = read_manifest(os.path.join(trajectory_dir, "manifest"))
    dt = float(manifest.get("config.time.dt", 1.0))
    every = int(manifest.get("config.output.every", 1))
    mesh_path = os.path.join(trajectory_dir, "mesh.txt")
    if not os.path.isfile(mesh_path):
        raise PlotsError(f"mesh.txt missing from {trajectory_dir}")

    snaps = sorted(
        name
        for name in os.listdir(trajectory_dir)
        if re.fullmatch(r"step_\d+\.csv", name)
    )
    frames = []
    for name in snaps:
        idx = int(name[5:-4])
        bnd = os.path.join(trajectory_dir, f"boundary_{idx:04d}.txt")
        time = 0.0 if idx == 0 else None
        frames.append((idx * every * dt, os.path.join(trajectory_dir, name), bnd))
    if not frames:
        raise PlotsError(f"no snapshots found in {trajectory_dir}")
    return FrameSet(frames, mesh_path)


def read_landscape(path):
    """Rectangular grid from a `cx,cy,distance` CSV.

    Returns (xs, ys, grid) with grid[iy, ix]; raises listing missing cells
    if the grid is ragged.
    """
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.dtype.names is None or set(data.dtype.names) != {"cx", "cy", "distance"}:
        raise PlotsError(f"{path} must have columns cx,cy,distance")
    cx = np.atleast_1d(data["cx"])
    cy = np.atleast_1d(data["cy"])
    dist = np.atleast_1d(data["distance"])
    xs = np.unique(cx)
    ys = np.unique(cy)
    grid = np.full((len(ys), len(xs)), np.nan)
    for x, y, d in zip(cx, cy, dist):
        grid[np.searchsorted(ys, y), np.searchsorted(xs, x)] = d
    if np.any(np.isnan(grid)):
        missing = [
            (float(xs[ix]), float(ys[iy]))
            for iy, ix in zip(*np.nonzero(np.isnan(grid)))
        ]
        raise PlotsError(f"ragged grid; missing cells: {missing}")
    return xs, ys, grid
