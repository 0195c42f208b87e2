"""Compiled inner loops for the forward/backward recursions.

Each recursion is written as explicit loops so the work done per step is
exactly what the algorithm prescribes; the ``*_counted`` twins add a
counter of semiring compositions (one per scalar add/multiply or
max/min evaluation, rescaling excluded).
"""

from __future__ import annotations

import numpy as np
from numba import njit

# --------------------------------------------------------------------------
# Classical HMM
# --------------------------------------------------------------------------


@njit(cache=True)
def hmm_forward(A, B, pi, obs):
    """Scaled forward pass. Returns (alpha_hat[T, N], scale[T])."""
    N = A.shape[0]
    T = obs.shape[0]
    alpha = np.empty((T, N))
    scale = np.empty(T)
    s = 0.0
    for i in range(N):
        v = pi[i] * B[i, obs[0]]
        alpha[0, i] = v
        s += v
    scale[0] = s
    if s > 0.0:
        for i in range(N):
            alpha[0, i] /= s
    At = np.ascontiguousarray(A.T)  # column j of A as a contiguous row
    for t in range(1, T):
        o = obs[t]
        s = 0.0
        for j in range(N):
            acc = 0.0
            for i in range(N):
                acc += alpha[t - 1, i] * At[j, i]
            v = acc * B[j, o]
            alpha[t, j] = v
            s += v
        scale[t] = s
        if s > 0.0:
            for j in range(N):
                alpha[t, j] /= s
    return alpha, scale


@njit(cache=True)
def hmm_backward(A, B, obs):
    """Backward pass normalized by its own per-step sums.

    Returns (beta_tilde[T, N], norm[T]) with norm[T-1] = 1 and
    beta_t = beta_tilde_t * prod(norm[t:]).
    """
    N = A.shape[0]
    T = obs.shape[0]
    beta = np.empty((T, N))
    norm = np.ones(T)
    for i in range(N):
        beta[T - 1, i] = 1.0
    for t in range(T - 2, -1, -1):
        o = obs[t + 1]
        s = 0.0
        for i in range(N):
            acc = 0.0
            for j in range(N):
                acc += A[i, j] * B[j, o] * beta[t + 1, j]
            beta[t, i] = acc
            s += acc
        norm[t] = s
        if s > 0.0:
            for i in range(N):
                beta[t, i] /= s
    return beta, norm


@njit(cache=True)
def hmm_forward_counted(A, B, pi, obs):
    N = A.shape[0]
    T = obs.shape[0]
    alpha = np.empty(N)
    nxt = np.empty(N)
    ops = 0
    loglik = 0.0
    s = 0.0
    for i in range(N):
        alpha[i] = pi[i] * B[i, obs[0]]
        s += alpha[i]
    ops += N
    loglik += np.log(s)
    for i in range(N):
        alpha[i] /= s
    for t in range(1, T):
        o = obs[t]
        for j in range(N):
            nxt[j] = 0.0
        for i in range(N):
            a = alpha[i]
            for j in range(N):
                nxt[j] += a * A[i, j]
        ops += 2 * N * N
        s = 0.0
        for j in range(N):
            nxt[j] *= B[j, o]
            s += nxt[j]
        ops += N
        loglik += np.log(s)
        for j in range(N):
            alpha[j] = nxt[j] / s
    return loglik, ops


# --------------------------------------------------------------------------
# Possibilistic HMM, max-min semiring
# --------------------------------------------------------------------------


@njit(cache=True)
def pt_forward_minmax(theta, emis, psi, obs):
    N = theta.shape[0]
    T = obs.shape[0]
    phi = np.empty((T, N))
    for i in range(N):
        phi[0, i] = min(psi[i], emis[i, obs[0]])
    for t in range(1, T):
        o = obs[t]
        for j in range(N):
            phi[t, j] = 0.0
        for i in range(N):
            a = phi[t - 1, i]
            for j in range(N):
                v = min(a, theta[i, j])
                if v > phi[t, j]:
                    phi[t, j] = v
        for j in range(N):
            phi[t, j] = min(phi[t, j], emis[j, o])
    return phi


@njit(cache=True)
def pt_backward_minmax(theta, emis, obs):
    N = theta.shape[0]
    T = obs.shape[0]
    gamma = np.empty((T, N))
    for i in range(N):
        gamma[T - 1, i] = 1.0
    for t in range(T - 2, -1, -1):
        o = obs[t + 1]
        for i in range(N):
            best = 0.0
            for j in range(N):
                v = min(theta[i, j], min(emis[j, o], gamma[t + 1, j]))
                if v > best:
                    best = v
            gamma[t, i] = best
    return gamma


@njit(cache=True)
def pt_forward_minmax_counted(theta, emis, psi, obs):
    N = theta.shape[0]
    T = obs.shape[0]
    phi = np.empty(N)
    nxt = np.empty(N)
    ops = 0
    for i in range(N):
        phi[i] = min(psi[i], emis[i, obs[0]])
    ops += N
    for t in range(1, T):
        o = obs[t]
        for j in range(N):
            nxt[j] = 0.0
        for i in range(N):
            a = phi[i]
            for j in range(N):
                v = min(a, theta[i, j])
                if v > nxt[j]:
                    nxt[j] = v
        ops += 2 * N * N
        for j in range(N):
            phi[j] = min(nxt[j], emis[j, o])
        ops += N
    best = phi[0]
    for i in range(1, N):
        if phi[i] > best:
            best = phi[i]
    ops += N - 1
    return best, ops


# --------------------------------------------------------------------------
# Possibilistic HMM, all-max composition (linear-time fast path)
# --------------------------------------------------------------------------


@njit(cache=True)
def _max1(x):
    m = x[0]
    for i in range(1, x.shape[0]):
        if x[i] > m:
            m = x[i]
    return m


@njit(cache=True)
def pt_forward_allmax(colmax, emis, psi, obs):
    """All-max forward pass using precomputed column maxima of theta."""
    N = emis.shape[0]
    T = obs.shape[0]
    phi = np.empty((T, N))
    m = _max1(psi)
    e = _max1(emis[:, obs[0]])
    v = m if m > e else e
    for i in range(N):
        phi[0, i] = v
    for t in range(1, T):
        m = _max1(phi[t - 1])
        o = obs[t]
        for j in range(N):
            v = m if m > colmax[j] else colmax[j]
            e = emis[j, o]
            phi[t, j] = v if v > e else e
    return phi


@njit(cache=True)
def pt_backward_allmax(rowmax, emis, psi, obs):
    N = emis.shape[0]
    T = obs.shape[0]
    gamma = np.empty((T, N))
    m = _max1(psi)
    e = _max1(emis[:, obs[T - 1]])
    v = m if m > e else e
    for i in range(N):
        gamma[T - 1, i] = v
    for t in range(T - 2, -1, -1):
        g = _max1(gamma[t + 1])
        e = _max1(emis[:, obs[t + 1]])
        v = g if g > e else e
        for i in range(N):
            gamma[t, i] = v if v > rowmax[i] else rowmax[i]
    return gamma


@njit(cache=True)
def pt_forward_allmax_counted(colmax, emis, psi, obs):
    N = emis.shape[0]
    T = obs.shape[0]
    phi = np.empty(N)
    ops = 0
    m = _max1(psi)
    e = _max1(emis[:, obs[0]])
    v = m if m > e else e
    ops += 2 * (N - 1) + 1
    for i in range(N):
        phi[i] = v
    for t in range(1, T):
        m = _max1(phi)
        ops += N - 1
        o = obs[t]
        for j in range(N):
            v = m if m > colmax[j] else colmax[j]
            e = emis[j, o]
            phi[j] = v if v > e else e
        ops += 2 * N
    best = _max1(phi)
    ops += N - 1
    return best, ops
