"""Discrete-observation hidden Markov model: the probabilistic baseline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ArgumentError

__all__ = [
    "HmmModel",
    "Evaluation",
    "FitResult",
    "as_symbols",
    "hmm_evaluate",
    "hmm_loglik",
    "hmm_viterbi",
    "hmm_fit",
    "hmm_train",
    "random_hmm",
    "sample_hmm",
]

_ROW_TOL = 1e-9


def _frozen(x) -> np.ndarray:
    a = np.array(x, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HmmModel:
    """Row-stochastic transition ``A`` (N x N), emission ``B`` (N x M), initial ``pi``."""

    transition: np.ndarray
    emission: np.ndarray
    initial: np.ndarray

    def __post_init__(self) -> None:
        a, b, p = (_frozen(x) for x in (self.transition, self.emission, self.initial))
        n = a.shape[0]
        if a.ndim != 2 or a.shape != (n, n) or n < 1:
            raise ArgumentError(f"transition must be square, got {a.shape}")
        if b.ndim != 2 or b.shape[0] != n or b.shape[1] < 1:
            raise ArgumentError(f"emission must be {n} x M, got {b.shape}")
        if p.shape != (n,):
            raise ArgumentError(f"initial must have length {n}, got {p.shape}")
        for name, m in (("transition", a), ("emission", b), ("initial", p[None, :])):
            if not np.all(np.isfinite(m)) or m.min() < 0 or m.max() > 1:
                raise ArgumentError(f"{name} entries must lie in [0, 1]")
            if np.max(np.abs(m.sum(axis=1) - 1.0)) > _ROW_TOL:
                raise ArgumentError(f"{name} rows must sum to 1")
        object.__setattr__(self, "transition", a)
        object.__setattr__(self, "emission", b)
        object.__setattr__(self, "initial", p)

    @property
    def num_states(self) -> int:
        return self.transition.shape[0]

    @property
    def num_symbols(self) -> int:
        return self.emission.shape[1]


def as_symbols(obs, num_symbols: int) -> np.ndarray:
    o = np.asarray(obs)
    if o.ndim != 1 or o.size == 0:
        raise ArgumentError("an observation sequence must be a nonempty 1-D sequence")
    if o.dtype.kind == "f":
        if not np.all(o == np.round(o)):
            raise ArgumentError("observation symbols must be integers")
    elif o.dtype.kind not in "iub":
        raise ArgumentError("observation symbols must be integers")
    o = o.astype(np.int64)
    if o.min() < 0 or o.max() >= num_symbols:
        raise ArgumentError(
            f"observation symbol out of range [0, {num_symbols}): "
            f"found {int(o.min()) if o.min() < 0 else int(o.max())}"
        )
    return o


@dataclass(frozen=True)
class Evaluation:
    """Forward/backward results in forward scaling.

    ``forward[t] * backward[t]`` sums to 1 for every ``t``;
    ``loglik_backward`` comes from the backward pass alone.
    """

    loglik: float
    forward: np.ndarray
    backward: np.ndarray
    scale: np.ndarray
    loglik_backward: float

    def posteriors(self) -> np.ndarray:
        return self.forward * self.backward


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def hmm_evaluate(model: HmmModel, obs) -> Evaluation:
    o = as_symbols(obs, model.num_symbols)
    A, B, pi = model.transition, model.emission, model.initial
    alpha, scale = _kernels.hmm_forward(A, B, pi, o)
    loglik = float(np.sum(_log(scale)))
    beta_t, norm = _kernels.hmm_backward(A, B, o)
    loglik_b = float(_log(np.sum(pi * B[:, o[0]] * beta_t[0])) + np.sum(_log(norm)))
    # Rescale the backward variables to share the forward scaling.
    log_norm_suffix = np.cumsum(_log(norm)[::-1])[::-1]
    log_scale_suffix = np.concatenate([np.cumsum(_log(scale)[::-1])[::-1][1:], [0.0]])
    with np.errstate(invalid="ignore"):
        factor = np.exp(log_norm_suffix - log_scale_suffix)
    backward = beta_t * factor[:, None]
    return Evaluation(loglik, alpha, backward, scale, loglik_b)


def hmm_loglik(model: HmmModel, obs) -> float:
    o = as_symbols(obs, model.num_symbols)
    _, scale = _kernels.hmm_forward(model.transition, model.emission, model.initial, o)
    return float(np.sum(_log(scale)))


def hmm_viterbi(model: HmmModel, obs) -> tuple[np.ndarray, float]:
    """Most probable state path and its log-probability.

    Among equally probable paths the lexicographically smallest is returned
    (ties within 1e-12 in log space).
    """
    o = as_symbols(obs, model.num_symbols)
    logA = _log(model.transition)
    logE = _log(model.emission[:, o]).T  # (T, N)
    T, N = logE.shape
    # suffix[t, i]: best log-probability of steps t+1..T given state i at t
    suffix = np.zeros((T, N))
    for t in range(T - 2, -1, -1):
        suffix[t] = np.max(logA + logE[t + 1] + suffix[t + 1], axis=1)
    start = _log(model.initial) + logE[0] + suffix[0]
    best = float(np.max(start))
    path = np.empty(T, dtype=np.int64)
    if not np.isfinite(best):
        path[:] = 0
        return path, best
    tol = 1e-12 * max(1.0, abs(best))
    path[0] = int(np.flatnonzero(start >= best - tol)[0])
    for t in range(1, T):
        prev = path[t - 1]
        cand = logA[prev] + logE[t] + suffix[t]
        target = suffix[t - 1, prev]
        path[t] = int(np.flatnonzero(cand >= target - 1e-12 * max(1.0, abs(target)))[0])
    logp = float(
        _log(model.initial[path[0]])
        + np.sum(logA[path[:-1], path[1:]])
        + np.sum(logE[np.arange(T), path])
    )
    return path, logp


@dataclass(frozen=True)
class FitResult:
    model: HmmModel
    loglik_history: tuple[float, ...]
    iterations: int
    converged: bool
    last_change: float


def _expected_counts(model: HmmModel, o: np.ndarray):
    ev = hmm_evaluate(model, o)
    gamma = ev.forward * ev.backward
    gamma /= gamma.sum(axis=1, keepdims=True)
    A, B = model.transition, model.emission
    if o.size > 1:
        # xi[t, i, j] ∝ alpha_t(i) A_ij B_j(o_{t+1}) beta_{t+1}(j) / c_{t+1}
        xi = (
            ev.forward[:-1, :, None]
            * A[None]
            * (B[:, o[1:]].T * ev.backward[1:])[:, None, :]
            / ev.scale[1:, None, None]
        )
        trans = xi.sum(axis=0)
    else:
        trans = np.zeros_like(A)
    emis = np.zeros_like(B)
    np.add.at(emis.T, o, gamma)
    return ev.loglik, gamma[0], trans, emis


def _normalize_rows(counts: np.ndarray, floor: float) -> np.ndarray:
    c = counts + floor
    return c / c.sum(axis=-1, keepdims=True)


def hmm_fit(
    model: HmmModel,
    sequences: Sequence,
    max_iters: int = 100,
    tol: float = 1e-6,
    smoothing: float = 1e-6,
) -> FitResult:
    """Multi-sequence Baum-Welch.

    Expected counts are summed over sequences, a pseudo-count of
    ``smoothing`` is added to every entry and rows are renormalized.
    Stops when the largest parameter change falls below ``tol``.
    ``loglik_history[k]`` is the total log-likelihood of the model before
    update ``k``; the final entry scores the returned model.
    """
    seqs = [as_symbols(s, model.num_symbols) for s in sequences]
    if not seqs:
        raise ArgumentError("training needs at least one sequence")
    if max_iters < 0 or tol < 0 or smoothing < 0:
        raise ArgumentError("max_iters, tol and smoothing must be non-negative")
    history = []
    converged = False
    change = float("inf")
    it = 0
    for it in range(1, max_iters + 1):
        total = 0.0
        init = np.zeros(model.num_states)
        trans = np.zeros_like(model.transition)
        emis = np.zeros_like(model.emission)
        for o in seqs:
            ll, g0, tr, em = _expected_counts(model, o)
            total += ll
            init += g0
            trans += tr
            emis += em
        history.append(total)
        new = HmmModel(
            _normalize_rows(trans, smoothing),
            _normalize_rows(emis, smoothing),
            _normalize_rows(init, smoothing),
        )
        change = max(
            float(np.max(np.abs(new.transition - model.transition))),
            float(np.max(np.abs(new.emission - model.emission))),
            float(np.max(np.abs(new.initial - model.initial))),
        )
        model = new
        if change < tol:
            converged = True
            break
    else:
        it = max_iters
    history.append(sum(hmm_loglik(model, o) for o in seqs))
    return FitResult(model, tuple(history), it, converged, change)


def hmm_train(model: HmmModel, sequences: Sequence, max_iters: int = 100, tol: float = 1e-6) -> HmmModel:
    return hmm_fit(model, sequences, max_iters=max_iters, tol=tol).model


def random_hmm(
    num_states: int,
    num_symbols: int,
    rng: np.random.Generator,
    left_right: bool = False,
) -> HmmModel:
    """Random row-stochastic model; ``left_right`` zeroes backward transitions."""
    a = rng.random((num_states, num_states)) + 0.05
    if left_right:
        a = np.triu(a)
    b = rng.random((num_states, num_symbols)) + 0.05
    p = rng.random(num_states) + 0.05
    if left_right:
        p = np.eye(num_states)[0]
    return HmmModel(
        a / a.sum(axis=1, keepdims=True),
        b / b.sum(axis=1, keepdims=True),
        p / p.sum(),
    )


def sample_hmm(model: HmmModel, length: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw (states, symbols) of the given length."""
    if length < 1:
        raise ArgumentError("length must be >= 1")
    states = np.empty(length, dtype=np.int64)
    symbols = np.empty(length, dtype=np.int64)
    s = rng.choice(model.num_states, p=model.initial)
    for t in range(length):
        if t:
            s = rng.choice(model.num_states, p=model.transition[s])
        states[t] = s
        symbols[t] = rng.choice(model.num_symbols, p=model.emission[s])
    return states, symbols
