import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import ramp_frame, symmetric3_eigen
from ptseq.errors import ArgumentError
from ptseq.features import (
    Contour,
    chain_code,
    dwt_orientation,
    frame_statistic,
    fuse_normalized_features,
    gradient_field,
    keyframe_segments,
    orientation_histogram,
    pca_reduce,
    scaled_wavelet,
    select_middle_frames,
    spline_wavelet,
    trajectory_speed,
    wavelet_descriptor,
)


def rotation(a):
    return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])


def ellipse(n=64, a=3.0, b=1.5, phase=0.0):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False) + phase
    return np.column_stack([a * np.cos(t), b * np.sin(t)])


# --- gradients ---------------------------------------------------------------


def test_gradient_of_ramp():
    g = gradient_field(ramp_frame(0.3, 10))
    assert np.allclose(g.dx[1:-1, 1:-1], math.cos(0.3))
    assert np.allclose(g.dy[1:-1, 1:-1], math.sin(0.3))
    assert np.all(g.dx[0] == 0) and np.all(g.dy[:, -1] == 0)
    assert frame_statistic(ramp_frame(0.3)) == pytest.approx(0.3, abs=1e-12)


def test_orientation_histogram():
    h = orientation_histogram(ramp_frame(0.0, 8), bins=18)
    assert h[0] == pytest.approx(36.0)
    assert h[1:].sum() == 0
    # an angle and its opposite fold onto the same bin
    h2 = orientation_histogram(ramp_frame(math.pi - 0.05, 8) * -1, bins=18)
    assert int(np.argmax(h2)) == 17 or int(np.argmax(h2)) == 0
    assert np.all(orientation_histogram(np.ones((6, 6))) == 0)
    with pytest.raises(ArgumentError):
        gradient_field(np.ones((2, 5)))


# --- key frames --------------------------------------------------------------


def _gesture_sequence():
    angles = [0.0] * 5 + list(np.linspace(0.2, 1.5, 20)) + [1.7] * 5
    return [ramp_frame(a) for a in angles]


def test_single_gesture_between_pauses():
    assert keyframe_segments(_gesture_sequence()) == [(5, 24)]


def test_all_identical_frames_is_one_pause():
    assert keyframe_segments([ramp_frame(0.4)] * 10) == []


def test_two_gestures_split_by_plateau():
    angles = list(np.linspace(0.1, 0.9, 10)) + [1.0] * 5 + list(np.linspace(1.2, 2.0, 10))
    segs = keyframe_segments([ramp_frame(a) for a in angles])
    assert segs == [(0, 9), (15, 24)]


def test_short_flat_run_is_not_a_pause():
    angles = [0.1, 0.2, 0.3, 0.3, 0.3, 0.5, 0.6]
    assert keyframe_segments([ramp_frame(a) for a in angles]) == [(0, 6)]


def test_keyframe_errors():
    with pytest.raises(ArgumentError):
        keyframe_segments([])
    with pytest.raises(ArgumentError):
        keyframe_segments([ramp_frame(0.1)])


def test_select_middle_frames():
    assert select_middle_frames((0, 29), 15) == list(range(7, 22))
    assert select_middle_frames((3, 8), 15) == list(range(3, 9))
    assert select_middle_frames((10, 24), 15) == list(range(10, 25))


@given(st.integers(0, 100), st.integers(0, 60), st.integers(1, 20))
def test_select_middle_frames_is_centred(start, extra, k):
    end = start + extra
    sel = select_middle_frames((start, end), k)
    assert len(sel) == min(k, extra + 1)
    assert sel == list(range(sel[0], sel[0] + len(sel)))
    left, right = sel[0] - start, end - sel[-1]
    assert 0 <= right - left <= 1


# --- trajectories and orientation -------------------------------------------


def test_trajectory_speed():
    assert np.allclose(trajectory_speed([[0, 0], [3, 4], [3, 4]]), [5, 0])
    assert np.allclose(trajectory_speed([[0, 0], [1, 0]], weight=2.5), [2.5])
    with pytest.raises(ArgumentError):
        trajectory_speed([[0, 0]])


def test_dwt_orientation_stripes():
    y, x = np.mgrid[0:32, 0:32]
    horizontal = np.cos(2 * np.pi * y / 8.0)
    vertical = np.cos(2 * np.pi * x / 8.0)
    assert dwt_orientation(horizontal).angle == pytest.approx(math.pi / 2, abs=1e-9)
    assert dwt_orientation(vertical).angle == pytest.approx(0.0, abs=1e-9)
    r = dwt_orientation(np.full((16, 16), 2.0))
    assert r.degenerate and r.angle == 0.0
    with pytest.raises(ArgumentError):
        dwt_orientation(np.ones((4, 4)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dwt_orientation_in_range(seed):
    g = np.random.default_rng(seed).normal(size=(16, 16))
    r = dwt_orientation(g)
    assert 0.0 <= r.angle <= math.pi / 2


def test_chain_code_directions():
    angles = np.arange(8) * math.pi / 4
    angles = np.where(angles > math.pi, angles - 2 * math.pi, angles)
    codes = chain_code(angles)
    assert sorted(codes.tolist()) == list(range(8))
    assert chain_code(0.0) == 0
    assert chain_code(math.pi / 2) == 6
    assert chain_code(-math.pi / 2) == 2


# --- wavelet moments ---------------------------------------------------------


def test_spline_wavelet_shape():
    assert scaled_wavelet(0.3, 0, 0) == pytest.approx(float(spline_wavelet(0.3)))
    assert scaled_wavelet(0.3, 2, 1) == pytest.approx(2 * float(spline_wavelet(4 * 0.3 - 0.5)))
    # centred at r = 1/2 and even about it
    r = np.linspace(0, 1, 21)
    assert np.allclose(spline_wavelet(r), spline_wavelet(1 - r))


def test_descriptor_length():
    d = wavelet_descriptor(Contour(ellipse()), max_scale=3, num_harmonics=4)
    assert d.shape == (4 * sum(2 ** (m + 1) + 1 for m in range(4)),)
    assert np.all(d >= 0)


@pytest.mark.parametrize("angle", [0.4, 1.0, 2.5, -2.0])
def test_descriptor_rotation_invariant(angle):
    base = ellipse(64, 3.0, 1.2)
    d0 = wavelet_descriptor(Contour(base))
    d1 = wavelet_descriptor(Contour(base @ rotation(angle).T + [5.0, -2.0]))
    assert np.allclose(d0, d1, rtol=1e-6, atol=1e-9)


def test_descriptor_distinguishes_shapes():
    a = wavelet_descriptor(Contour(ellipse(64, 3.0, 1.0)))
    b = wavelet_descriptor(Contour(ellipse(64, 2.0, 2.0)))
    assert np.linalg.norm(a - b) > 1e-3


def test_contour_validation():
    with pytest.raises(ArgumentError):
        Contour(np.zeros((5, 2)))
    line = np.column_stack([np.arange(10.0), np.zeros(10)])
    with pytest.raises(ArgumentError):
        wavelet_descriptor(Contour(line))
    sq = Contour(np.array([[0, 0], [1, 0], [2, 0], [2, 1], [2, 2], [1, 2], [0, 2], [0, 1]], float))
    assert sq.signed_area == pytest.approx(4.0)
    assert np.allclose(sq.centroid, [1, 1])


# --- normalization -----------------------------------------------------------


def test_fuse_normalized_features():
    f = fuse_normalized_features([1, 2, 4], [0.0, math.pi / 2, -math.pi / 2], [3, 0, 6])
    assert np.allclose(f[:, 0], [0, 6 / 8, 2 / 8])
    assert np.allclose(f[:, 1], [0.5, 0, 1])
    assert np.allclose(f[:, 2], [0.25, 0.5, 1])
    z = fuse_normalized_features([0, 0], [0, 0], [0, 0])
    assert np.all(z == 0)
    with pytest.raises(ArgumentError):
        fuse_normalized_features([1, -1], [0, 0], [1, 1])
    with pytest.raises(ArgumentError):
        fuse_normalized_features([1], [0, 0], [1])


@given(st.lists(st.tuples(st.floats(0, 100), st.floats(-3.14, 3.14), st.floats(0, 100)), min_size=1, max_size=30))
def test_fused_features_in_unit_box(rows):
    s, o, g = map(list, zip(*rows))
    f = fuse_normalized_features(s, o, g)
    assert np.all((f >= 0) & (f <= 1))


# --- PCA ---------------------------------------------------------------------


def test_pca_matches_closed_form_3x3():
    rng = np.random.default_rng(11)
    x = rng.normal(size=(200, 3)) @ np.array([[3.0, 0.5, 0.1], [0.0, 1.5, 0.3], [0.0, 0.0, 0.4]])
    model, reduced = pca_reduce(x, 2)
    cov = np.cov(x, rowvar=False)
    vals, vecs = symmetric3_eigen(cov)
    assert np.allclose(model.all_eigenvalues, vals, rtol=1e-8)
    for got, want in zip(model.components, vecs[:2]):
        assert abs(abs(got @ want) - 1) < 1e-8
        assert got[np.argmax(np.abs(got))] > 0
    assert reduced.shape == (200, 2)
    assert np.allclose(reduced.var(axis=0, ddof=1), vals[:2], rtol=1e-8)


def test_pca_full_rank_round_trip_and_discarded_variance():
    x = np.random.default_rng(12).normal(size=(50, 4))
    model, reduced = pca_reduce(x, 4)
    assert np.allclose(model.inverse_transform(reduced), x, atol=1e-10)
    assert np.allclose(model.components @ model.components.T, np.eye(4), atol=1e-12)
    m2, r2 = pca_reduce(x, 2)
    err = ((m2.inverse_transform(r2) - x) ** 2).sum() / (len(x) - 1)
    assert err == pytest.approx(m2.discarded_variance, rel=1e-9)


def test_pca_errors():
    with pytest.raises(ArgumentError):
        pca_reduce(np.ones((1, 3)), 1)
    with pytest.raises(ArgumentError):
        pca_reduce(np.ones((4, 3)), 4)
