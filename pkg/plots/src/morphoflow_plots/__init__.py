"""Rendering of morphoflow trajectory snapshots and grid-search landscapes."""

from .frames import render_frames
from .io import FrameSet, PlotsError, discover_frames, read_landscape
from .landscape import render_landscape

__version__ = "0.1.0"
