"""Linde-Buzo-Gray vector quantization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

__all__ = ["Codebook", "lbg_train", "quantize", "nearest", "total_distortion"]


@dataclass(frozen=True)
class Codebook:
    centroids: np.ndarray  # (K, D)
    distortion_history: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        c = np.array(self.centroids, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2 or c.shape[0] < 1:
            raise ArgumentError("a codebook needs at least one centroid")
        c.setflags(write=False)
        object.__setattr__(self, "centroids", c)
        object.__setattr__(self, "distortion_history", tuple(float(d) for d in self.distortion_history))

    @property
    def size(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


def _as_matrix(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ArgumentError("expected an N x D matrix")
    if not np.all(np.isfinite(a)):
        raise ArgumentError("vectors must be finite")
    return a


def _sq_dists(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    return ((x[:, None, :] - c[None, :, :]) ** 2).sum(axis=2)


def nearest(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Index of the nearest centroid per row; argmin keeps the lowest index on ties."""
    return np.argmin(_sq_dists(x, centroids), axis=1)


def total_distortion(x, centroids, labels) -> float:
    """Sum of squared Euclidean distances to the assigned centroids."""
    x = _as_matrix(x)
    c = _as_matrix(centroids)
    return float(((x - c[labels]) ** 2).sum())


def _initial_centroids(x: np.ndarray, k: int) -> np.ndarray:
    _, first = np.unique(x, axis=0, return_index=True)
    picks = list(np.sort(first)[:k])
    while len(picks) < k:
        picks.append(picks[len(picks) % len(first)])
    return x[picks].copy()


def lbg_train(
    vectors,
    k: int,
    epsilon: float = 1e-6,
    max_iters: int = 100,
    return_labels: bool = False,
):
    """Train a ``k``-centroid codebook.

    Centroids start at the first ``k`` distinct rows.  Each iteration
    assigns rows to the nearest centroid and moves each centroid to the
    mean of its rows; an empty cluster is reseeded at the row farthest
    from its current centroid.  Iteration stops once no centroid moves by
    ``epsilon`` or more and the assignment is stable, or after
    ``max_iters``.  ``distortion_history`` holds the total squared
    distortion after every assignment step.
    """
    x = _as_matrix(vectors)
    n = x.shape[0]
    if k < 1 or k > n:
        raise ArgumentError(f"k must be in [1, {n}], got {k}")
    if epsilon <= 0:
        raise ArgumentError("epsilon must be positive")
    if max_iters < 1:
        raise ArgumentError("max_iters must be >= 1")
    c = _initial_centroids(x, k)
    labels = nearest(x, c)
    history = [total_distortion(x, c, labels)]
    for _ in range(max_iters):
        new = c.copy()
        for j in range(k):
            members = labels == j
            if members.any():
                new[j] = x[members].mean(axis=0)
        counts = np.bincount(labels, minlength=k)
        for j in np.flatnonzero(counts == 0):
            far = int(np.argmax(((x - new[labels]) ** 2).sum(axis=1)))
            new[j] = x[far]
            labels[far] = j
        shift = float(np.max(np.sqrt(((new - c) ** 2).sum(axis=1))))
        c = new
        new_labels = nearest(x, c)
        stable = np.array_equal(new_labels, labels)
        labels = new_labels
        history.append(total_distortion(x, c, labels))
        if shift < epsilon and stable:
            break
    book = Codebook(c, tuple(history))
    return (book, labels) if return_labels else book


def quantize(codebook: Codebook, features) -> np.ndarray:
    """Map each feature row to the index of its nearest centroid."""
    x = _as_matrix(features)
    if x.shape[1] != codebook.dim:
        raise ArgumentError(f"feature dimension {x.shape[1]} does not match codebook dimension {codebook.dim}")
    return nearest(x, codebook.centroids)
