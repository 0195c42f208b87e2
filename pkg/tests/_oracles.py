"""Independent brute-force references used across the test suite."""

from __future__ import annotations

import cmath
import itertools
import math

import numpy as np


def all_paths(n_states: int, length: int):
    return itertools.product(range(n_states), repeat=length)


def hmm_path_prob(A, B, pi, obs, path) -> float:
    p = pi[path[0]] * B[path[0], obs[0]]
    for t in range(1, len(obs)):
        p *= A[path[t - 1], path[t]] * B[path[t], obs[t]]
    return p


def hmm_likelihood(A, B, pi, obs) -> float:
    return sum(hmm_path_prob(A, B, pi, obs, p) for p in all_paths(len(pi), len(obs)))


def hmm_best_path(A, B, pi, obs):
    """Max-probability path; enumeration order makes the first maximum lexicographically smallest."""
    best, arg = -1.0, None
    for p in all_paths(len(pi), len(obs)):
        v = hmm_path_prob(A, B, pi, obs, p)
        if v > best:
            best, arg = v, p
    return arg, best


def pt_path_value(theta, emis, psi, obs, path, conj) -> float:
    v = conj(psi[path[0]], emis[path[0], obs[0]])
    for t in range(1, len(obs)):
        v = conj(v, conj(theta[path[t - 1], path[t]], emis[path[t], obs[t]]))
    return v


def pt_best(theta, emis, psi, obs, conj):
    best, arg = -1.0, None
    for p in all_paths(len(psi), len(obs)):
        v = pt_path_value(theta, emis, psi, obs, p, conj)
        if v > best:
            best, arg = v, p
    return arg, best


def hmm_expected_counts(A, B, pi, obs):
    """Posterior state and transition counts by explicit path enumeration."""
    n, m, T = len(pi), B.shape[1], len(obs)
    total = hmm_likelihood(A, B, pi, obs)
    init = np.zeros(n)
    trans = np.zeros((n, n))
    emis = np.zeros((n, m))
    for p in all_paths(n, T):
        w = hmm_path_prob(A, B, pi, obs, p) / total
        init[p[0]] += w
        for t in range(T):
            emis[p[t], obs[t]] += w
            if t:
                trans[p[t - 1], p[t]] += w
    return init, trans, emis


def dft(x):
    n = len(x)
    return np.array([sum(x[k] * cmath.exp(-2j * math.pi * f * k / n) for k in range(n)) for f in range(n)])


def dct2_ortho(x):
    n = len(x)
    out = np.empty(n)
    for k in range(n):
        s = sum(x[i] * math.cos(math.pi * k * (2 * i + 1) / (2 * n)) for i in range(n))
        out[k] = s * (math.sqrt(1 / n) if k == 0 else math.sqrt(2 / n))
    return out


def symmetric3_eigen(c):
    """Eigenvalues (descending) of a symmetric 3x3 matrix by the trigonometric cubic formula,
    with eigenvectors from cross products of rows of ``C - lambda I``."""
    c = np.asarray(c, float)
    p1 = c[0, 1] ** 2 + c[0, 2] ** 2 + c[1, 2] ** 2
    q = np.trace(c) / 3
    if p1 == 0:
        vals = np.sort(np.diag(c))[::-1]
    else:
        p2 = (c[0, 0] - q) ** 2 + (c[1, 1] - q) ** 2 + (c[2, 2] - q) ** 2 + 2 * p1
        p = math.sqrt(p2 / 6)
        b = (c - q * np.eye(3)) / p
        r = max(-1.0, min(1.0, np.linalg.det(b) / 2))
        phi = math.acos(r) / 3
        e1 = q + 2 * p * math.cos(phi)
        e3 = q + 2 * p * math.cos(phi + 2 * math.pi / 3)
        vals = np.array([e1, 3 * q - e1 - e3, e3])
    vecs = []
    for lam in vals:
        m = c - lam * np.eye(3)
        crosses = [np.cross(m[i], m[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
        v = max(crosses, key=np.linalg.norm)
        vecs.append(v / np.linalg.norm(v))
    return vals, np.array(vecs)


def best_two_partition(points):
    """Centroids of the minimum squared-error split into two nonempty groups, by enumeration."""
    x = np.asarray(points, float)
    if x.ndim == 1:
        x = x[:, None]
    n = len(x)
    best = None
    for mask in range(1, 2 ** (n - 1)):
        members = np.array([(mask >> i) & 1 for i in range(n)], bool)
        a, b = x[members], x[~members]
        cost = ((a - a.mean(0)) ** 2).sum() + ((b - b.mean(0)) ** 2).sum()
        if best is None or cost < best[0]:
            best = (cost, a.mean(0), b.mean(0))
    pair = sorted([best[1], best[2]], key=lambda v: tuple(v))
    return np.array(pair)


def ramp_frame(angle: float, size: int = 12) -> np.ndarray:
    """Grid ``g = cos(a) x + sin(a) y`` whose interior gradient direction is ``a``."""
    y, x = np.mgrid[0:size, 0:size].astype(float)
    return math.cos(angle) * x + math.sin(angle) * y
