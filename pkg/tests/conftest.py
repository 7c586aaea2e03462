import numpy as np
import pytest

from evtkit import EventStream, FrameSequence


def random_stream(rng, width=8, height=6, n=40, t0=0.0, t1=1.0):
    return EventStream(
        rng.uniform(t0, t1, n),
        rng.integers(0, width, n),
        rng.integers(0, height, n),
        rng.choice([-1, 1], n),
        width, height, t0, t1,
    )


def moving_edge_sequence(width=64, height=64, n_frames=13,
                         lo=0.15, hi=0.6, sharpness=0.5, duration=1.0):
    """A smooth vertical edge sweeping left to right across the frame.

    This is the synthetic ground-truth scene for the roundtrip tests: the
    edge crosses 60% of the width over the sequence, every row is identical,
    and intensities stay well above the log floor.
    """
    ts = np.linspace(0.0, duration, n_frames)
    xs = np.arange(width)
    frames = []
    for t in ts:
        center = width * (0.2 + 0.6 * t / duration)
        row = lo + (hi - lo) / (1.0 + np.exp(-(xs - center) / sharpness))
        frames.append(np.tile(row, (height, 1)))
    return FrameSequence(np.stack(frames), ts)


def event_keys(stream):
    """Hashable identity of each event (integer-microsecond time, x, y, p)."""
    return set(zip(np.round(stream.t * 1e6).astype(np.int64).tolist(),
                   stream.x.tolist(), stream.y.tolist(), stream.p.tolist()))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
