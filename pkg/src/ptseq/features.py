"""Sequence-level features for gesture-style inputs.

Gradients and orientation histograms on 2-D grids, key-frame segmentation
of frame sequences, trajectory speed, DWT orientation, rotation-invariant
wavelet moment descriptors of closed contours, feature normalization and
PCA.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .dsp import D4, WaveletFilter, dwt2d, get_wavelet
from .errors import ArgumentError

__all__ = [
    "GradientField",
    "gradient_field",
    "orientation_histogram",
    "frame_statistic",
    "keyframe_segments",
    "select_middle_frames",
    "trajectory_speed",
    "OrientationResult",
    "dwt_orientation",
    "Contour",
    "wavelet_descriptor",
    "chain_code",
    "fuse_normalized_features",
    "PcaModel",
    "pca_reduce",
]


@dataclass(frozen=True)
class GradientField:
    dx: np.ndarray
    dy: np.ndarray
    direction: np.ndarray
    magnitude: np.ndarray


def _grid(grid, min_size: int) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 2:
        raise ArgumentError("expected a 2-D grid")
    if min(g.shape) < min_size:
        raise ArgumentError(f"grid {g.shape} is smaller than {min_size}x{min_size}")
    return g


def gradient_field(grid) -> GradientField:
    """Central differences on the interior; the border carries zero gradient.

    The grid is indexed ``grid[y, x]``.
    """
    g = _grid(grid, 3)
    dx = np.zeros_like(g)
    dy = np.zeros_like(g)
    dx[1:-1, 1:-1] = (g[1:-1, 2:] - g[1:-1, :-2]) / 2.0
    dy[1:-1, 1:-1] = (g[2:, 1:-1] - g[:-2, 1:-1]) / 2.0
    return GradientField(
        dx=dx,
        dy=dy,
        direction=np.arctan2(dy, dx),
        magnitude=np.hypot(dx, dy),
    )


def orientation_histogram(grid, bins: int = 18) -> np.ndarray:
    """Magnitude-weighted histogram of gradient orientations folded to [0, 180)."""
    if bins < 2:
        raise ArgumentError("orientation histogram needs at least 2 bins")
    field = gradient_field(grid)
    mag = field.magnitude[1:-1, 1:-1].ravel()
    ang = np.mod(field.direction[1:-1, 1:-1].ravel(), np.pi)
    keep = mag > 0
    idx = np.floor(ang[keep] * (bins / np.pi)).astype(int)
    idx = np.minimum(idx, bins - 1)
    return np.bincount(idx, weights=mag[keep], minlength=bins)


# --------------------------------------------------------------------------
# Key frames
# --------------------------------------------------------------------------


def frame_statistic(frame) -> float:
    """Mean gradient direction over the interior of one frame."""
    return float(gradient_field(frame).direction[1:-1, 1:-1].mean())


def keyframe_segments(
    frames,
    flat_tolerance: float | None = None,
    min_run: int = 3,
) -> list[tuple[int, int]]:
    """Split a frame sequence at plateaus of the per-frame direction statistic.

    Consecutive frames whose statistic differs by less than
    ``flat_tolerance`` are "flat".  A run of at least ``min_run`` flat
    differences marks a pause; every frame touched by a pause belongs to no
    gesture.  Returns inclusive ``(start, end)`` index pairs of the
    remaining maximal runs.  The tolerance defaults to 1e-3 times the
    largest frame-to-frame difference.
    """
    frames = list(frames)
    if not frames:
        raise ArgumentError("keyframe_segments needs at least one frame")
    if len(frames) < 2:
        raise ArgumentError("keyframe_segments needs at least two frames")
    if min_run < 1:
        raise ArgumentError("min_run must be >= 1")
    stats = np.array([frame_statistic(f) for f in frames])
    diffs = np.abs(np.diff(stats))
    peak = diffs.max()
    if flat_tolerance is None:
        flat_tolerance = 1e-3 * peak
    flat = diffs <= flat_tolerance if peak == 0 else diffs < flat_tolerance

    pause = np.zeros(len(frames), dtype=bool)
    t = 0
    while t < flat.size:
        if not flat[t]:
            t += 1
            continue
        end = t
        while end < flat.size and flat[end]:
            end += 1
        if end - t >= min_run:
            pause[t : end + 1] = True
        t = end

    segments = []
    start = None
    for i, p in enumerate(pause):
        if not p and start is None:
            start = i
        elif p and start is not None:
            segments.append((start, i - 1))
            start = None
    if start is not None:
        segments.append((start, len(frames) - 1))
    return segments


def select_middle_frames(segment: tuple[int, int], k: int = 15) -> list[int]:
    """The ``k`` indices centred in an inclusive segment (offset rounds down)."""
    start, end = segment
    n = end - start + 1
    if k < 1:
        raise ArgumentError("k must be >= 1")
    if n <= k:
        return list(range(start, end + 1))
    offset = (n - k) // 2
    return list(range(start + offset, start + offset + k))


def trajectory_speed(points, weight: float = 1.0) -> np.ndarray:
    """Euclidean step lengths between consecutive points, times ``weight``."""
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < 2:
        raise ArgumentError("need at least two (x, y) points")
    return weight * np.hypot(*(p[:-1] - p[1:]).T)


class OrientationResult(NamedTuple):
    angle: float
    degenerate: bool


def dwt_orientation(grid, filt: "WaveletFilter | str" = D4) -> OrientationResult:
    """Dominant orientation from second-level DWT detail energies.

    ``arctan(|FG| / |GF|)`` with FG the low-row/high-column subband and GF
    the reverse, in [0, pi/2].  Horizontal stripes give pi/2, vertical
    stripes 0.  When both energies vanish the angle is 0 and ``degenerate``
    is set.
    """
    filt = get_wavelet(filt)
    g = _grid(grid, 2 * len(filt))
    level1 = dwt2d(g, filt)
    level2 = dwt2d(level1.ll, filt)
    fg = float(np.linalg.norm(level2.lh))
    gf = float(np.linalg.norm(level2.hl))
    scale = max(float(np.linalg.norm(g)), 1.0)
    if fg * fg + gf * gf <= 1e-24 * scale * scale:
        return OrientationResult(0.0, True)
    return OrientationResult(math.atan2(fg, gf), False)


# --------------------------------------------------------------------------
# Wavelet moment descriptor
# --------------------------------------------------------------------------

# Gaussian approximation of the cubic B-spline mother wavelet (order 3).
_SPLINE_ORDER = 3
_SPLINE_A = 0.697066
_SPLINE_F0 = 0.409177
_SPLINE_SIGMA2 = 0.561145


def spline_wavelet(r):
    r = np.asarray(r, dtype=float)
    n1 = _SPLINE_ORDER + 1
    u = 2.0 * r - 1.0
    amp = 4 * _SPLINE_A**n1 / math.sqrt(2 * math.pi * n1) * math.sqrt(_SPLINE_SIGMA2)
    return amp * np.cos(2 * np.pi * _SPLINE_F0 * u) * np.exp(-(u**2) / (2 * _SPLINE_SIGMA2 * n1))


def scaled_wavelet(r, m: int, n: int):
    """Dyadic dilation ``2**(m/2) * psi(2**m r - n/2)``."""
    return 2.0 ** (m / 2) * spline_wavelet(2.0**m * np.asarray(r, float) - 0.5 * n)


@dataclass(frozen=True)
class Contour:
    """Closed polygon; the last point connects back to the first."""

    points: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.points, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2:
            raise ArgumentError("contour points must be (x, y) pairs")
        if p.shape[0] < 8:
            raise ArgumentError("a contour needs at least 8 points")
        if not np.all(np.isfinite(p)):
            raise ArgumentError("contour points must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @property
    def signed_area(self) -> float:
        x, y = self.points.T
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def centroid(self) -> np.ndarray:
        x, y = self.points.T
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cross = x * yn - xn * y
        a = 0.5 * cross.sum()
        if a == 0:
            raise ArgumentError("contour encloses zero area")
        return np.array([np.sum((x + xn) * cross), np.sum((y + yn) * cross)]) / (6 * a)

    def resample(self, count: int) -> np.ndarray:
        """``count`` points equally spaced in arc length from the first vertex."""
        p = self.points
        closed = np.vstack([p, p[:1]])
        seg = np.hypot(*np.diff(closed, axis=0).T)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        targets = np.arange(count) * (s[-1] / count)
        x = np.interp(targets, s, closed[:, 0])
        y = np.interp(targets, s, closed[:, 1])
        return np.column_stack([x, y])


def wavelet_descriptor(
    contour: Contour,
    max_scale: int = 3,
    num_harmonics: int = 4,
    contour_samples: int = 256,
    radial_samples: int = 256,
) -> np.ndarray:
    """Rotation-invariant wavelet moments ``|G_{m,n,b}|`` of a closed contour.

    The contour is the support of the shape image, so the angular transform
    ``f_b(r)`` is a line integral: each of ``contour_samples`` arc-length
    samples contributes ``exp(j b theta) ds`` at its normalized radius
    (``r <= 1`` after dividing by the largest radius).  Contributions are
    spread linearly onto a fixed grid of ``radial_samples`` radii and the
    radial integral against each dyadic wavelet is evaluated on that grid.
    Rotating the contour only multiplies ``f_b`` by a unit phase, so the
    magnitudes are unchanged.

    The result is ordered by ``m`` (0..max_scale), then ``n``
    (0..2**(m+1)), then ``b`` (0..num_harmonics-1).
    """
    if not isinstance(contour, Contour):
        contour = Contour(np.asarray(contour, float))
    if abs(contour.signed_area) <= 1e-12 * max(1.0, float(np.ptp(contour.points)) ** 2):
        raise ArgumentError("contour encloses zero area")
    if max_scale < 0 or num_harmonics < 1:
        raise ArgumentError("need max_scale >= 0 and num_harmonics >= 1")
    c = contour.centroid
    pts = contour.resample(contour_samples) - c
    radius = np.hypot(pts[:, 0], pts[:, 1])
    rmax = radius.max()
    if rmax == 0:
        raise ArgumentError("contour collapses to its centroid")
    r = radius / rmax
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    ds = 1.0 / contour_samples

    # Linear (cloud-in-cell) deposit onto the radial grid.
    grid = np.linspace(0.0, 1.0, radial_samples)
    pos = r * (radial_samples - 1)
    lo = np.minimum(np.floor(pos).astype(int), radial_samples - 2)
    frac = pos - lo
    harmonics = np.exp(1j * np.outer(np.arange(num_harmonics), theta)) * ds
    density = np.zeros((num_harmonics, radial_samples), dtype=complex)
    for b in range(num_harmonics):
        np.add.at(density[b], lo, harmonics[b] * (1 - frac))
        np.add.at(density[b], lo + 1, harmonics[b] * frac)

    feats = []
    for m in range(max_scale + 1):
        for n in range(2 ** (m + 1) + 1):
            basis = scaled_wavelet(grid, m, n)
            feats.append(np.abs(density @ basis))
    return np.concatenate(feats)


# --------------------------------------------------------------------------
# Normalization
# --------------------------------------------------------------------------


def chain_code(theta, num_chain: int = 8) -> np.ndarray:
    """8-direction chain code of displacement angles from ``atan2``.

    ``(N - floor(theta/(pi/4) + 0.5 + N*[theta < 0])) mod N``; a negative
    angle stands for a negative vertical displacement.
    """
    theta = np.asarray(theta, dtype=float)
    step = 2 * np.pi / num_chain
    raw = np.floor(theta / step + 0.5 + num_chain * (theta < 0)).astype(int)
    return np.mod(num_chain - raw, num_chain)


def _by_max(x: np.ndarray) -> np.ndarray:
    peak = x.max()
    if peak == 0:
        return np.zeros_like(x)
    return x / peak


def fuse_normalized_features(speeds, orientations, moments) -> np.ndarray:
    """Stack (orientation, moment, speed) rows scaled into [0, 1].

    Speeds and moments are divided by their sequence maxima (an all-zero
    column stays zero).  Orientations are chain-coded and divided by 8.
    """
    s = np.asarray(speeds, dtype=float).ravel()
    o = np.asarray(orientations, dtype=float).ravel()
    g = np.asarray(moments, dtype=float).ravel()
    if not (s.size == o.size == g.size) or s.size == 0:
        raise ArgumentError("speeds, orientations and moments need equal nonzero lengths")
    if np.any(s < 0) or np.any(g < 0):
        raise ArgumentError("speeds and moments must be non-negative")
    if not np.all(np.isfinite(np.concatenate([s, o, g]))):
        raise ArgumentError("features must be finite")
    return np.column_stack([chain_code(o) / 8.0, _by_max(g), _by_max(s)])


# --------------------------------------------------------------------------
# PCA
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (k, D), orthonormal rows
    eigenvalues: np.ndarray  # (k,), descending
    all_eigenvalues: np.ndarray  # (D,), descending

    def transform(self, data) -> np.ndarray:
        return (np.asarray(data, float) - self.mean) @ self.components.T

    def inverse_transform(self, reduced) -> np.ndarray:
        return np.asarray(reduced, float) @ self.components + self.mean

    @property
    def discarded_variance(self) -> float:
        return float(self.all_eigenvalues[self.components.shape[0]:].sum())


def pca_reduce(data, k: int) -> tuple[PcaModel, np.ndarray]:
    """Project mean-centred data on the top-``k`` covariance eigenvectors.

    Each component's largest-magnitude entry is made positive.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ArgumentError("PCA needs an (N >= 2) x D matrix")
    d = x.shape[1]
    if not 1 <= k <= d:
        raise ArgumentError(f"k must be in [1, {d}], got {k}")
    mean = x.mean(axis=0)
    centred = x - mean
    cov = centred.T @ centred / (x.shape[0] - 1)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    vecs = vecs[:, order].T
    pivots = np.argmax(np.abs(vecs), axis=1)
    signs = np.sign(vecs[np.arange(d), pivots])
    vecs = vecs * signs[:, None]
    model = PcaModel(mean=mean, components=vecs[:k], eigenvalues=vals[:k], all_eigenvalues=vals)
    return model, centred @ model.components.T
