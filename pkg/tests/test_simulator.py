import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from evtkit import FrameSequence, SensorModel, simulate_events, synthesize_blur, validate
from evtkit.simulate import LOG_EPS, log_map


def single_pixel_frames(log_values, times):
    intensities = np.exp(np.asarray(log_values, dtype=float))
    assert intensities.max() <= 1.0
    return FrameSequence(intensities.reshape(-1, 1, 1), np.asarray(times, dtype=float))


def test_log_map_endpoints():
    assert log_map(1.0) == 0.0
    assert log_map(0.0) == pytest.approx(math.log(1e-4), abs=1e-12)


@given(a=st.floats(0, 1), b=st.floats(0, 1))
def test_log_map_monotone(a, b):
    lo, hi = sorted((a, b))
    assert log_map(lo) <= log_map(hi)


def test_constant_frames_emit_nothing():
    frames = FrameSequence(np.full((5, 3, 3), 0.4), np.linspace(0, 1, 5))
    s = simulate_events(frames, SensorModel.uniform(0.1, 3, 3))
    assert len(s) == 0
    assert s.t_start == 0.0 and s.t_end == 1.0


def test_ramp_closed_form_crossings():
    # log intensity ramps -0.35 -> 0 over [0, 1]; threshold 0.1 crosses at
    # levels 0.1k, i.e. t = 0.1k / 0.35
    frames = single_pixel_frames([-0.35, 0.0], [0.0, 1.0])
    s = simulate_events(frames, SensorModel.uniform(0.1, 1, 1))
    assert list(s.p) == [1, 1, 1]
    np.testing.assert_allclose(s.t, [2 / 7, 4 / 7, 6 / 7], atol=1e-12)


def test_smaller_threshold_never_fewer_events(rng):
    # holds per monotone signal; direction reversals introduce hysteresis
    for _ in range(20):
        n = rng.integers(3, 8)
        logs = np.sort(rng.uniform(-2.0, 0.0, n))
        if rng.random() < 0.5:
            logs = logs[::-1]
        frames = single_pixel_frames(logs, np.arange(n, dtype=float))
        c1, c2 = sorted(rng.uniform(0.05, 0.4, 2))
        s1 = simulate_events(frames, SensorModel.uniform(c1, 1, 1))
        s2 = simulate_events(frames, SensorModel.uniform(c2, 1, 1))
        for pol in (-1, 1):
            assert np.count_nonzero(s1.p == pol) >= np.count_nonzero(s2.p == pol)


def test_event_level_consistency(rng):
    # ref moves by exactly one threshold per event, so the total log change
    # matches c * signed count to within one threshold
    frames = FrameSequence(rng.uniform(0.05, 1.0, (6, 4, 4)), np.arange(6, dtype=float))
    c = 0.15
    s = simulate_events(frames, SensorModel.uniform(c, 4, 4))
    total = log_map(frames.frames[-1]) - log_map(frames.frames[0])
    signed = np.zeros((4, 4))
    np.add.at(signed, (s.y, s.x), s.p.astype(float))
    assert np.all(np.abs(total - c * signed) < c)


def test_timestamps_inside_window_and_sorted(rng):
    frames = FrameSequence(rng.uniform(0.05, 1.0, (5, 6, 6)),
                           np.array([0.0, 0.3, 0.5, 0.8, 1.2]))
    s = simulate_events(frames, SensorModel.uniform(0.2, 6, 6))
    assert len(s) > 0
    assert s.t.min() >= 0.0 and s.t.max() <= 1.2
    assert validate(s) is None


def test_simulation_is_deterministic(rng):
    frames = FrameSequence(rng.uniform(0.05, 1.0, (5, 6, 6)), np.arange(5, dtype=float))
    sensor = SensorModel.uniform(0.2, 6, 6)
    a = simulate_events(frames, sensor)
    b = simulate_events(frames, sensor)
    assert np.array_equal(a.t, b.t) and np.array_equal(a.p, b.p)


def test_rejects_short_sequence_and_geometry_mismatch():
    frames = FrameSequence(np.full((1, 3, 3), 0.5), np.array([0.0]))
    with pytest.raises(ValueError):
        simulate_events(frames, SensorModel.uniform(0.1, 3, 3))
    frames = FrameSequence(np.full((2, 3, 3), 0.5), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        simulate_events(frames, SensorModel.uniform(0.1, 5, 5))


@settings(max_examples=30, deadline=None)
@given(amp=st.floats(0.2, 3.0), c=st.floats(0.05, 0.5))
def test_monotone_ramp_count_is_floor(amp, c):
    # exact multiples are float-roundtrip sensitive through exp/log
    assume(abs(amp / c - round(amp / c)) > 1e-6)
    frames = single_pixel_frames([-amp, 0.0], [0.0, 1.0])
    s = simulate_events(frames, SensorModel.uniform(c, 1, 1))
    assert len(s) == math.floor(amp / c)


def test_blur_single_frame_identity(rng):
    frames = FrameSequence(rng.uniform(0, 1, (4, 3, 3)), np.arange(4, dtype=float))
    np.testing.assert_array_equal(synthesize_blur(frames, 2, 1), frames.frames[2])


def test_blur_two_uniform_frames():
    frames = FrameSequence(np.stack([np.full((2, 2), 0.2), np.full((2, 2), 0.4)]),
                           np.array([0.0, 1.0]))
    np.testing.assert_allclose(synthesize_blur(frames, 0, 2), 0.3)


@pytest.mark.parametrize("count", range(7, 14))
def test_blur_typical_window_sizes(count, rng):
    frames = FrameSequence(rng.uniform(0, 1, (13, 4, 4)), np.arange(13, dtype=float))
    out = synthesize_blur(frames, 0, count)
    np.testing.assert_allclose(out, frames.frames[:count].mean(axis=0))


def test_blur_range_checks(rng):
    frames = FrameSequence(rng.uniform(0, 1, (4, 2, 2)), np.arange(4, dtype=float))
    with pytest.raises(ValueError):
        synthesize_blur(frames, 0, 5)
    with pytest.raises(ValueError):
        synthesize_blur(frames, 3, 2)
    with pytest.raises(ValueError):
        synthesize_blur(frames, 0, 0)


def test_log_floor_guards_zero_intensity():
    frames = FrameSequence(np.stack([np.zeros((1, 1)), np.ones((1, 1))]),
                           np.array([0.0, 1.0]))
    s = simulate_events(frames, SensorModel.uniform(1.0, 1, 1))
    # dynamic range is exactly -ln(1e-4) ~ 9.21 log units
    assert len(s) == math.floor(-math.log(LOG_EPS))
