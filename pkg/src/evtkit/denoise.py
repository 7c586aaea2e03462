"""Classical event-stream denoising: spatiotemporal-support and hot-pixel filters.

Both filters are subset operations: every kept event is an unmodified member
of the input, and the output is canonical-sorted.
"""

from __future__ import annotations

import numpy as np

from .core import EventStream, canonical_sort

__all__ = ["scf_filter", "hot_pixel_filter"]


def scf_filter(stream: EventStream, radius: int = 1, window: float = 0.010,
               min_support: int = 2) -> EventStream:
    """Keep events with at least ``min_support`` other events within Chebyshev
    ``radius`` pixels and +/- ``window`` seconds.

    Support counting ignores polarity. An exact duplicate of an event counts
    as a supporting neighbor. min_support = 0 keeps everything.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    if window <= 0:
        raise ValueError("window must be > 0")
    if min_support < 0:
        raise ValueError("min_support must be >= 0")
    s = canonical_sort(stream)
    if min_support == 0 or len(s) == 0:
        return s

    lo = np.searchsorted(s.t, s.t - window, side="left")
    hi = np.searchsorted(s.t, s.t + window, side="right")
    keep = np.zeros(len(s), dtype=bool)
    for i in range(len(s)):
        xs = s.x[lo[i]:hi[i]]
        ys = s.y[lo[i]:hi[i]]
        near = ((np.abs(xs - s.x[i]) <= radius)
                & (np.abs(ys - s.y[i]) <= radius))
        # the event itself falls in its own window; subtract it
        if int(near.sum()) - 1 >= min_support:
            keep[i] = True
    return s.with_arrays(s.t[keep], s.x[keep], s.y[keep], s.p[keep])


def hot_pixel_filter(stream: EventStream, rate_threshold: float) -> EventStream:
    """Drop all events from pixels whose event rate over the stream window
    exceeds ``rate_threshold`` events/s. Zero-duration streams pass unchanged."""
    if rate_threshold <= 0:
        raise ValueError("rate_threshold must be > 0")
    s = canonical_sort(stream)
    duration = s.t_end - s.t_start
    if len(s) == 0 or duration <= 0:
        return s
    pixel = s.y.astype(np.int64) * s.width + s.x
    counts = np.bincount(pixel, minlength=s.width * s.height)
    hot = counts / duration > rate_threshold
    keep = ~hot[pixel]
    return s.with_arrays(s.t[keep], s.x[keep], s.y[keep], s.p[keep])
