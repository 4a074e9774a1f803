"""Grid-search heatmap: bright colors at low varifold distance."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import read_landscape


def render_landscape(gridsearch_csv, out_path, truth=None):
    """Render the distance landscape; returns (image path, argmin center).

    The axes fill the whole figure so that data coordinates map affinely to
    pixels; the reversed-viridis colormap places the brightest color at the
    smallest distance (with a marker on the truth center when given).
    """
    xs, ys, grid = read_landscape(gridsearch_csv)
    iy, ix = np.unravel_index(np.argmin(grid), grid.shape)
    argmin_center = (float(xs[ix]), float(ys[iy]))

    dx = xs[1] - xs[0] if len(xs) > 1 else 1.0
    dy = ys[1] - ys[0] if len(ys) > 1 else 1.0
    extent = (
        xs[0] - 0.5 * dx,
        xs[-1] + 0.5 * dx,
        ys[0] - 0.5 * dy,
        ys[-1] + 0.5 * dy,
    )

    fig = plt.figure(figsize=(4.0, 4.0), dpi=100)
    ax = fig.add_axes([0.0, 0.0, 1.0, 1.0])
    ax.imshow(grid, origin="lower", extent=extent, cmap="viridis_r",
              interpolation="nearest", aspect="auto")
    if truth is not None:
        ax.plot([truth[0]], [truth[1]], marker="x", markersize=10,
                markeredgewidth=2.0, color="red")
    ax.set_xlim(extent[0], extent[1])
    ax.set_ylim(extent[2], extent[3])
    ax.axis("off")
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    fig.savefig(out_path, metadata={"Software": None})
    plt.close(fig)
    return out_path, argmin_center
