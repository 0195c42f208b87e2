"""Timing and operation-count benchmark of the HMM and PTBHMM forward passes."""

from __future__ import annotations

import os
import platform
import time
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import ArgumentError
from .hmm import random_hmm
from .possibility import Algebra
from .pthmm import pt_forward_counted, random_pthmm

__all__ = ["BenchmarkReport", "benchmark_run", "time_call", "loglog_slope", "forward_pair"]


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def time_call(fn: Callable[[], object], trials: int = 3, min_seconds: float = 0.02) -> float:
    """Best-of-``trials`` seconds per call; each trial repeats until ``min_seconds`` elapse."""
    fn()
    reps = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(reps):
            fn()
        if time.perf_counter() - t0 >= min_seconds:
            break
        reps *= 2
    best = float("inf")
    for _ in range(trials):
        t0 = time.perf_counter()
        for _ in range(reps):
            fn()
        best = min(best, (time.perf_counter() - t0) / reps)
    return best


def forward_pair(n: int, t: int, rng: np.random.Generator):
    """Random models with ``n`` states and symbols, a length-``t`` sequence, and two timing closures.

    The closures call the compiled forward passes on pre-validated inputs
    so that only the recursion itself is timed.
    """
    hmm = random_hmm(n, n, rng)
    pt = random_pthmm(n, n, rng, Algebra.ALL_MAX)
    obs = rng.integers(0, n, size=t).astype(np.int64)
    colmax = pt.column_max
    A, B, pi = hmm.transition, hmm.emission, hmm.initial
    E, psi = pt.emission, pt.initial

    def run_hmm():
        return _kernels.hmm_forward(A, B, pi, obs)

    def run_pt():
        return _kernels.pt_forward_allmax(colmax, E, psi, obs)

    return hmm, pt, obs, run_hmm, run_pt


@dataclass(frozen=True)
class BenchmarkReport:
    n: list
    t: int
    hmm_ns: list
    pthmm_ns: list
    hmm_ops: list
    pthmm_ops: list
    hmm_slope: float
    pthmm_slope: float
    hmm_ops_slope: float
    pthmm_ops_slope: float
    seed: int
    trials: int
    environment: str

    def to_dict(self) -> dict:
        return asdict(self)


def benchmark_run(
    sizes: Sequence[int] = (8, 16, 32, 64, 128),
    t: int = 2000,
    trials: int = 3,
    seed: int = 0,
) -> BenchmarkReport:
    sizes = [int(s) for s in sizes]
    if len(sizes) < 4 or len(set(sizes)) < 4 or min(sizes) < 1:
        raise ArgumentError("benchmark needs at least 4 distinct positive state counts")
    if t < 2 or trials < 1:
        raise ArgumentError("benchmark needs t >= 2 and trials >= 1")
    rng = np.random.default_rng(seed)
    hmm_ns, pt_ns, hmm_ops, pt_ops = [], [], [], []
    for n in sizes:
        hmm, pt, obs, run_hmm, run_pt = forward_pair(n, t, rng)
        hmm_ns.append(time_call(run_hmm, trials) * 1e9)
        pt_ns.append(time_call(run_pt, trials) * 1e9)
        hmm_ops.append(int(_kernels.hmm_forward_counted(hmm.transition, hmm.emission, hmm.initial, obs)[1]))
        pt_ops.append(pt_forward_counted(pt, obs)[1])
    env = f"python {platform.python_version()} on {platform.machine()}, {os.cpu_count()} cpu"
    return BenchmarkReport(
        n=sizes,
        t=t,
        hmm_ns=hmm_ns,
        pthmm_ns=pt_ns,
        hmm_ops=hmm_ops,
        pthmm_ops=pt_ops,
        hmm_slope=loglog_slope(sizes, hmm_ns),
        pthmm_slope=loglog_slope(sizes, pt_ns),
        hmm_ops_slope=loglog_slope(sizes, hmm_ops),
        pthmm_ops_slope=loglog_slope(sizes, pt_ops),
        seed=seed,
        trials=trials,
        environment=env,
    )
