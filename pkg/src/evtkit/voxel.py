"""Event stream -> H x W x N signed-count voxel tensor."""

from __future__ import annotations

import numpy as np

from .core import EventStream, VoxelGrid

__all__ = ["voxelize", "net_polarity"]


def voxelize(stream: EventStream, t0: float, duration: float, n_channels: int = 10) -> VoxelGrid:
    """Bin event polarities into ``n_channels`` equal time slices of
    [t0, t0 + duration].

    Channel n holds the signed polarity sum of events with
    t in [t0 + n*duration/N, t0 + (n+1)*duration/N); the event at exactly
    t0 + duration is assigned to the last channel so the full window loses
    no events. Events outside the window are ignored.
    """
    if duration <= 0:
        raise ValueError("duration must be > 0")
    if n_channels < 1:
        raise ValueError("n_channels must be >= 1")
    data = np.zeros((stream.height, stream.width, n_channels))
    inside = (stream.t >= t0) & (stream.t <= t0 + duration)
    if inside.any():
        t = stream.t[inside]
        chan = np.floor((t - t0) * n_channels / duration).astype(np.int64)
        chan = np.minimum(chan, n_channels - 1)  # right-edge closure
        np.add.at(data, (stream.y[inside], stream.x[inside], chan),
                  stream.p[inside].astype(np.float64))
    return VoxelGrid(data, t0, duration, n_channels)


def net_polarity(grid: VoxelGrid) -> np.ndarray:
    """Per-pixel signed event count: sum of the voxel tensor over channels."""
    return grid.data.sum(axis=2)
