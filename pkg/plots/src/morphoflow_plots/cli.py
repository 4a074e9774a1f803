"""Command line: `plots render-frames <dir>` / `plots render-landscape <csv>`."""

import argparse
import sys

from .frames import render_frames
from .io import PlotsError
from .landscape import render_landscape


def main(argv=None):
    parser = argparse.ArgumentParser(prog="plots",
                                     description="render morphoflow outputs")
    sub = parser.add_subparsers(dest="command", required=True)

    p_frames = sub.add_parser("render-frames", help="one PNG per snapshot")
    p_frames.add_argument("trajectory_dir")
    p_frames.add_argument("--out", default=None, help="image directory")
    p_frames.add_argument("--vmin", type=float, default=None)
    p_frames.add_argument("--vmax", type=float, default=None)

    p_land = sub.add_parser("render-landscape", help="grid-search heatmap")
    p_land.add_argument("csv")
    p_land.add_argument("--out", default=None, help="output image path")
    p_land.add_argument("--truth", default=None, help="cx,cy marker")

    args = parser.parse_args(argv)
    try:
        if args.command == "render-frames":
            out_dir = args.out or (args.trajectory_dir.rstrip("/") + "_frames")
            limits = None
            if args.vmin is not None and args.vmax is not None:
                limits = (args.vmin, args.vmax)
            paths = render_frames(args.trajectory_dir, out_dir, limits)
            print(f"wrote {len(paths)} frames to {out_dir}")
            return 0
        truth = None
        if args.truth:
            cx, cy = args.truth.split(",")
            truth = (float(cx), float(cy))
        out_path = args.out or "landscape.png"
        path, argmin_center = render_landscape(args.csv, out_path, truth)
        print(f"wrote {path}; minimum at {argmin_center}")
        return 0
    except (PlotsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
