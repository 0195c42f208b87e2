"""Possibilistic hidden Markov model.

Parameters are possibility degrees rather than probabilities: transition
``theta`` (N x N), emission ``pi`` (N x M) and initial ``psi`` (N), all in
[0, 1].  Sums over paths become ``max`` and products along a path become
the conjunction of the chosen :class:`~ptseq.possibility.Algebra`.

Under ``MIN_MAX`` this is the max-min semiring and every recursion costs
O(N^2 T).  Under ``ALL_MAX`` every composition is ``max``; the
forward step then only needs the running maximum of the previous column
and the column maxima of ``theta``, which brings the cost down to O(N T).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import ArgumentError
from .hmm import as_symbols
from .possibility import Algebra

__all__ = [
    "PthmmModel",
    "ForwardResult",
    "pt_forward",
    "pt_backward",
    "pt_combine",
    "pt_viterbi",
    "pt_forward_counted",
    "PtFitResult",
    "pt_fit",
    "pt_learn",
    "pt_classify",
    "random_pthmm",
    "max_normalize",
]


def _frozen(x) -> np.ndarray:
    a = np.array(x, dtype=float)
    a.setflags(write=False)
    return a


def max_normalize(x: np.ndarray) -> np.ndarray:
    """Divide each row (last axis) by its maximum; all-zero rows stay zero."""
    x = np.asarray(x, dtype=float)
    peak = x.max(axis=-1, keepdims=True)
    safe = np.where(peak > 0, peak, 1.0)
    return np.clip(x / safe, 0.0, 1.0)


@dataclass(frozen=True)
class PthmmModel:
    """Possibilistic parameters ``(theta, pi, psi)`` and the algebra to run them in."""

    transition: np.ndarray
    emission: np.ndarray
    initial: np.ndarray
    algebra: Algebra = Algebra.MIN_MAX
    normalized: bool = False

    def __post_init__(self) -> None:
        a, b, p = (_frozen(x) for x in (self.transition, self.emission, self.initial))
        n = a.shape[0] if a.ndim == 2 else 0
        if a.ndim != 2 or a.shape != (n, n) or n < 1:
            raise ArgumentError(f"transition must be square, got {a.shape}")
        if b.ndim != 2 or b.shape[0] != n or b.shape[1] < 1:
            raise ArgumentError(f"emission must be {n} x M, got {b.shape}")
        if p.shape != (n,):
            raise ArgumentError(f"initial must have length {n}, got {p.shape}")
        for name, m in (("transition", a), ("emission", b), ("initial", p)):
            if not np.all(np.isfinite(m)) or m.min() < 0.0 or m.max() > 1.0:
                raise ArgumentError(f"{name} entries must lie in [0, 1]")
        if self.normalized:
            for name, m in (("transition", a), ("emission", b), ("initial", p[None])):
                if np.any(m.max(axis=1) != 1.0):
                    raise ArgumentError(f"every {name} row must contain a 1")
        object.__setattr__(self, "transition", a)
        object.__setattr__(self, "emission", b)
        object.__setattr__(self, "initial", p)
        object.__setattr__(self, "algebra", Algebra.parse(self.algebra))

    @property
    def num_states(self) -> int:
        return self.transition.shape[0]

    @property
    def num_symbols(self) -> int:
        return self.emission.shape[1]

    @cached_property
    def column_max(self) -> np.ndarray:
        return self.transition.max(axis=0)

    @cached_property
    def row_max(self) -> np.ndarray:
        return self.transition.max(axis=1)

    def with_algebra(self, algebra: "Algebra | str") -> "PthmmModel":
        return PthmmModel(self.transition, self.emission, self.initial, Algebra.parse(algebra), self.normalized)


class ForwardResult(NamedTuple):
    phi: np.ndarray
    possibility: float


def _conj(algebra: Algebra):
    return np.minimum if algebra is Algebra.MIN_MAX else np.maximum


def pt_forward(model: PthmmModel, obs) -> ForwardResult:
    """Forward variables ``phi[t, i]`` and the sequence possibility ``max_i phi[T-1, i]``.

    In both algebras the result equals the best conjunction of
    ``psi, pi(O_1), theta, pi(O_2), ...`` over all state paths.
    """
    o = as_symbols(obs, model.num_symbols)
    if model.algebra is Algebra.MIN_MAX:
        phi = _kernels.pt_forward_minmax(model.transition, model.emission, model.initial, o)
    else:
        phi = _kernels.pt_forward_allmax(model.column_max, model.emission, model.initial, o)
    return ForwardResult(phi, float(phi[-1].max()))


def pt_backward(model: PthmmModel, obs) -> np.ndarray:
    """Backward variables ``gamma[t, i]``.

    Under ``MIN_MAX`` ``gamma[T-1] = 1`` (the identity of ``min``).  Under
    ``ALL_MAX`` the terminal value is ``max(max psi, max pi(O_T))``,
    which is 1 whenever the model is max-normalized.
    """
    o = as_symbols(obs, model.num_symbols)
    if model.algebra is Algebra.MIN_MAX:
        return _kernels.pt_backward_minmax(model.transition, model.emission, o)
    return _kernels.pt_backward_allmax(model.row_max, model.emission, model.initial, o)


def pt_combine(model: PthmmModel, obs, gamma: np.ndarray) -> float:
    """Sequence possibility from the backward variables: ``max_i conj(psi_i, pi_i(O_1), gamma_1(i))``."""
    o = as_symbols(obs, model.num_symbols)
    conj = _conj(model.algebra)
    return float(np.max(conj(conj(model.initial, model.emission[:, o[0]]), gamma[0])))


def pt_viterbi(model: PthmmModel, obs) -> tuple[np.ndarray, float]:
    """Best state path and its possibility under the model's algebra.

    Ties go to the lexicographically smallest path.  ``max`` and ``min``
    only ever select existing values, so ties are detected exactly.
    """
    o = as_symbols(obs, model.num_symbols)
    conj = _conj(model.algebra)
    identity = model.algebra.conjunction_identity
    E = model.emission[:, o].T  # (T, N)
    T, N = E.shape
    theta = model.transition
    # suffix[t, i]: best conjunction of steps t+1..T given state i at t
    suffix = np.full((T, N), identity)
    for t in range(T - 2, -1, -1):
        suffix[t] = np.max(conj(theta, conj(E[t + 1], suffix[t + 1])), axis=1)
    start = conj(conj(model.initial, E[0]), suffix[0])
    best = float(start.max())
    path = np.empty(T, dtype=np.int64)
    path[0] = int(np.flatnonzero(start == best)[0])
    prefix = conj(model.initial[path[0]], E[0, path[0]])
    for t in range(1, T):
        prev = path[t - 1]
        # smallest next state that still completes to the optimum
        cand = conj(prefix, conj(theta[prev], conj(E[t], suffix[t])))
        j = int(np.flatnonzero(cand == best)[0])
        path[t] = j
        prefix = conj(prefix, conj(theta[prev, j], E[t, j]))
    return path, best


def pt_forward_counted(model: PthmmModel, obs) -> tuple[float, int]:
    """Sequence possibility plus the number of max/min compositions executed.

    The per-model column maxima used by ``ALL_MAX`` are computed once
    and are not part of the per-sequence count.
    """
    o = as_symbols(obs, model.num_symbols)
    if model.algebra is Algebra.MIN_MAX:
        value, ops = _kernels.pt_forward_minmax_counted(model.transition, model.emission, model.initial, o)
    else:
        value, ops = _kernels.pt_forward_allmax_counted(model.column_max, model.emission, model.initial, o)
    return float(value), int(ops)


# --------------------------------------------------------------------------
# Learning
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PtFitResult:
    model: PthmmModel
    change_history: tuple[float, ...]
    iterations: int
    converged: bool


_FLOOR = 1e-12


def _ratio(num: np.ndarray, den: np.ndarray, old: np.ndarray) -> np.ndarray:
    """Row-wise ``num / den``; rows with no evidence keep their old values."""
    out = old.copy()
    ok = den > 0
    out[ok] = num[ok] / np.maximum(den[ok], _FLOOR)[:, None]
    return out


def _learn_step(model: PthmmModel, seqs: list[np.ndarray]) -> PthmmModel:
    conj = _conj(model.algebra)
    N, M = model.num_states, model.num_symbols
    theta, emis = model.transition, model.emission
    init = np.zeros(N)
    trans_num = np.zeros((N, N))
    trans_den = np.zeros(N)
    emis_num = np.zeros((N, M))
    emis_den = np.zeros(N)
    seen = False
    for o in seqs:
        phi, score = pt_forward(model, o)
        if score <= 0.0:
            continue
        seen = True
        gamma = pt_backward(model, o)
        xi = conj(phi, gamma) / score  # (T, N)
        init = np.maximum(init, xi[0])
        if o.size > 1:
            eps = conj(
                conj(phi[:-1, :, None], theta[None]),
                conj(emis[:, o[1:]].T, gamma[1:])[:, None, :],
            ) / score
            trans_num = np.maximum(trans_num, eps.max(axis=0))
            trans_den = np.maximum(trans_den, xi[:-1].max(axis=0))
        per_symbol = np.zeros((M, N))
        np.maximum.at(per_symbol, o, xi)
        emis_num = np.maximum(emis_num, per_symbol.T)
        emis_den = np.maximum(emis_den, xi.max(axis=0))
    if not seen:
        return model
    new_init = init if init.max() > 0 else model.initial.copy()
    new_theta = _ratio(trans_num, trans_den, theta)
    new_emis = _ratio(emis_num, emis_den, emis)
    return PthmmModel(
        max_normalize(new_theta),
        max_normalize(new_emis),
        max_normalize(new_init),
        model.algebra,
    )


def pt_fit(
    model: PthmmModel,
    sequences: Sequence,
    max_iters: int = 100,
    tol: float = 1e-4,
) -> PtFitResult:
    """Re-estimate ``(theta, pi, psi)`` by possibilistic forward-backward.

    With ``P`` the sequence possibility, ``xi_t(i) = conj(phi_t(i), gamma_t(i)) / P``
    and ``eps_t(i, j) = conj(phi_t(i), theta_ij, pi_j(O_{t+1}), gamma_{t+1}(j)) / P``.
    Aggregation over time and sequences is ``max``:

    * ``psi_i = max xi_1(i)``
    * ``theta_ij = max eps_t(i, j) / max xi_t(i)`` over ``t < T``
    * ``pi_j(k) = max_{O_t = k} xi_t(j) / max_t xi_t(j)``

    Every row is then max-normalized.  Iteration stops once the largest
    parameter change is below ``tol``.
    """
    seqs = [as_symbols(s, model.num_symbols) for s in sequences]
    if not seqs:
        raise ArgumentError("training needs at least one sequence")
    if max_iters < 0 or tol < 0:
        raise ArgumentError("max_iters and tol must be non-negative")
    history = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        new = _learn_step(model, seqs)
        change = max(
            float(np.max(np.abs(new.transition - model.transition))),
            float(np.max(np.abs(new.emission - model.emission))),
            float(np.max(np.abs(new.initial - model.initial))),
        )
        history.append(change)
        model = new
        if change < tol:
            converged = True
            break
    return PtFitResult(model, tuple(history), it, converged)


def pt_learn(model: PthmmModel, sequences: Sequence, max_iters: int = 100, tol: float = 1e-4) -> PthmmModel:
    return pt_fit(model, sequences, max_iters=max_iters, tol=tol).model


def random_pthmm(
    num_states: int,
    num_symbols: int,
    rng: np.random.Generator,
    algebra: "Algebra | str" = Algebra.MIN_MAX,
) -> PthmmModel:
    """Random max-normalized model (a good starting point for :func:`pt_fit`)."""
    return PthmmModel(
        max_normalize(rng.random((num_states, num_states))),
        max_normalize(rng.random((num_states, num_symbols))),
        max_normalize(rng.random(num_states)),
        Algebra.parse(algebra),
        normalized=True,
    )


def pt_classify(models, obs) -> list[tuple[object, float]]:
    """Rank labelled models by sequence possibility, best first.

    ``models`` is a mapping or an iterable of ``(label, model)`` pairs.
    Equal scores keep input order.
    """
    pairs = list(models.items()) if hasattr(models, "items") else list(models)
    if not pairs:
        raise ArgumentError("pt_classify needs at least one model")
    m = {model.num_symbols for _, model in pairs}
    if len(m) != 1:
        raise ArgumentError("all models must share one observation alphabet")
    scores = [(label, pt_forward(model, obs).possibility) for label, model in pairs]
    order = sorted(range(len(scores)), key=lambda k: (-scores[k][1], k))
    return [scores[k] for k in order]
