import os
import subprocess
import sys

import matplotlib.pyplot as plt
import numpy as np
import pytest

from morphoflow_plots import (
    PlotsError,
    discover_frames,
    read_landscape,
    render_frames,
    render_landscape,
)

MESH_TXT = """\
v 0 0
v 1 0
v 1 1
v 0 1
t 0 1 2
t 0 2 3
b 0 1
b 1 2
b 2 3
b 3 0
"""

BOUNDARY_TXT = "0 0\n1 0\n1 1\n0 1\n"


def snapshot_csv(p_values, positions=None):
    if positions is None:
        positions = [(0, 0), (1, 0), (1, 1), (0, 1)]
    lines = ["node,x,y,tau,p"]
    for i, ((x, y), p) in enumerate(zip(positions, p_values)):
        lines.append(f"{i},{x},{y},{p},{p}")
    return "\n".join(lines) + "\n"


def make_trajectory(tmp_path, frames, dt=0.5):
    d = tmp_path / "traj"
    d.mkdir()
    (d / "mesh.txt").write_text(MESH_TXT)
    names = ["mesh.txt"]
    for idx, p_values in enumerate(frames):
        (d / f"step_{idx:04d}.csv").write_text(snapshot_csv(p_values))
        (d / f"boundary_{idx:04d}.txt").write_text(BOUNDARY_TXT)
        names += [f"step_{idx:04d}.csv", f"boundary_{idx:04d}.txt"]
    manifest = ["status = ok", f"config.time.dt = {dt}", "config.output.every = 1"]
    manifest += [f"file.{n} = sha256:unchecked" for n in names]
    (d / "manifest").write_text("\n".join(manifest) + "\n")
    return d


def landscape_csv(tmp_path, xs, ys, values, name="landscape.csv"):
    path = tmp_path / name
    lines = ["cx,cy,distance"]
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            if values[iy][ix] is not None:
                lines.append(f"{x},{y},{values[iy][ix]}")
    path.write_text("\n".join(lines) + "\n")
    return str(path)


# -- frames -----------------------------------------------------------------------


def test_render_frames_counts_and_shared_scale(tmp_path):
    traj = make_trajectory(tmp_path, [[0, 0, 0, 0], [0, 1, 2, 1], [3, 3, 3, 3]])
    out = tmp_path / "frames"
    paths = render_frames(str(traj), str(out))
    assert len(paths) == 3
    assert all(os.path.isfile(p) for p in paths)
    scale = (out / "colorscale.txt").read_text()
    assert "vmin = 0" in scale and "vmax = 3" in scale


def test_render_frames_identical_inputs_identical_images(tmp_path):
    frame = [0.2, 0.4, 0.9, 0.1]
    traj = make_trajectory(tmp_path, [frame, frame])
    out = tmp_path / "frames"
    p0, p1 = render_frames(str(traj), str(out))
    img0 = plt.imread(p0)[:, :, :3]
    img1 = plt.imread(p1)[:, :, :3]
    # same field, same scale: pixel-identical away from the title text
    h = img0.shape[0]
    assert np.array_equal(img0[h // 4 :], img1[h // 4 :])


def test_render_frames_explicit_limits(tmp_path):
    traj = make_trajectory(tmp_path, [[0, 1, 2, 3]])
    out = tmp_path / "frames"
    render_frames(str(traj), str(out), colormap_limits=(0.0, 10.0))
    scale = (out / "colorscale.txt").read_text()
    assert "vmax = 10" in scale


def test_render_frames_skips_corrupt_snapshot(tmp_path, capsys):
    traj = make_trajectory(tmp_path, [[0, 0, 0, 0], [1, 1, 1, 1]])
    (traj / "step_0001.csv").write_text("garbage,without,columns\n1,2,3\n")
    out = tmp_path / "frames"
    paths = render_frames(str(traj), str(out))
    assert len(paths) == 1
    assert "skipping" in capsys.readouterr().err


def test_render_frames_all_corrupt_raises(tmp_path):
    traj = make_trajectory(tmp_path, [[0, 0, 0, 0]])
    (traj / "step_0000.csv").write_text("nope\n")
    with pytest.raises(PlotsError):
        render_frames(str(traj), str(tmp_path / "frames"))


def test_discover_frames_requires_manifest(tmp_path):
    with pytest.raises(PlotsError):
        discover_frames(str(tmp_path))


def test_frame_times_from_manifest(tmp_path):
    traj = make_trajectory(tmp_path, [[0] * 4, [1] * 4, [2] * 4], dt=0.25)
    fs = discover_frames(str(traj))
    assert [t for t, _, _ in fs.frames] == [0.0, 0.25, 0.5]


# -- landscape ---------------------------------------------------------------------


def test_landscape_brightest_cell_at_minimum(tmp_path):
    xs, ys = [-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]
    values = [[9, 8, 7], [6, 1, 5], [7, 6, 8]]  # min at (0, 0)
    csv = landscape_csv(tmp_path, xs, ys, values)
    out = tmp_path / "land.png"
    path, argmin_center = render_landscape(csv, str(out))
    assert argmin_center == (0.0, 0.0)

    img = plt.imread(path)[:, :, :3]
    lum = img.mean(axis=2)
    row, col = np.unravel_index(np.argmax(lum), lum.shape)
    height, width = lum.shape
    # full-bleed axes: pixels map affinely onto the padded grid extent
    x = -1.5 + 3.0 * (col + 0.5) / width
    y = -1.5 + 3.0 * (height - row - 0.5) / height
    assert -0.5 <= x <= 0.5
    assert -0.5 <= y <= 0.5


def test_landscape_single_cell(tmp_path):
    csv = landscape_csv(tmp_path, [0.0], [0.0], [[2.5]])
    path, argmin_center = render_landscape(csv, str(tmp_path / "one.png"))
    assert os.path.isfile(path)
    assert argmin_center == (0.0, 0.0)


def test_landscape_uniform_distances_uniform_image(tmp_path):
    csv = landscape_csv(tmp_path, [0, 1], [0, 1], [[3, 3], [3, 3]])
    path, _ = render_landscape(csv, str(tmp_path / "uniform.png"))
    img = plt.imread(path)[:, :, :3]
    assert np.allclose(img, img[0, 0], atol=1e-6)


def test_landscape_ragged_grid_lists_missing(tmp_path):
    csv = landscape_csv(tmp_path, [0, 1], [0, 1], [[1, 2], [3, None]])
    with pytest.raises(PlotsError, match="missing"):
        read_landscape(csv)
    with pytest.raises(PlotsError):
        render_landscape(csv, str(tmp_path / "x.png"))


def test_landscape_truth_marker_changes_image(tmp_path):
    xs, ys = [0.0, 1.0], [0.0, 1.0]
    values = [[1, 2], [3, 4]]
    csv = landscape_csv(tmp_path, xs, ys, values)
    plain, _ = render_landscape(csv, str(tmp_path / "plain.png"))
    marked, _ = render_landscape(csv, str(tmp_path / "marked.png"), truth=(0.0, 0.0))
    assert not np.array_equal(plt.imread(plain), plt.imread(marked))


# -- cli --------------------------------------------------------------------------


def test_cli_render_frames(tmp_path):
    traj = make_trajectory(tmp_path, [[0, 1, 2, 1]])
    out = tmp_path / "cli_frames"
    result = subprocess.run(
        [sys.executable, "-m", "morphoflow_plots.cli", "render-frames", str(traj),
         "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    assert (out / "frame_0000.png").exists()


def test_cli_render_landscape_and_errors(tmp_path):
    csv = landscape_csv(tmp_path, [0, 1], [0, 1], [[1, 2], [3, 4]])
    out = tmp_path / "l.png"
    result = subprocess.run(
        [sys.executable, "-m", "morphoflow_plots.cli", "render-landscape", csv,
         "--out", str(out), "--truth", "0,0"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    bad = subprocess.run(
        [sys.executable, "-m", "morphoflow_plots.cli", "render-landscape",
         str(tmp_path / "missing.csv"), "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert bad.returncode != 0
