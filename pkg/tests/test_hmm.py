import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import hmm_best_path, hmm_expected_counts, hmm_likelihood
from ptseq.errors import ArgumentError
from ptseq.hmm import (
    HmmModel,
    hmm_evaluate,
    hmm_fit,
    hmm_loglik,
    hmm_train,
    hmm_viterbi,
    random_hmm,
    sample_hmm,
)


def small_case(seed):
    rng = np.random.default_rng(seed)
    n, m, t = rng.integers(1, 4), rng.integers(1, 4), rng.integers(1, 6)
    return random_hmm(n, m, rng), rng.integers(0, m, size=t)


def test_single_state_product_of_emissions():
    model = HmmModel([[1.0]], [[0.5, 0.5]], [1.0])
    assert math.exp(hmm_loglik(model, [0, 1])) == pytest.approx(0.25, abs=1e-15)


def test_uniform_emissions():
    rng = np.random.default_rng(0)
    base = random_hmm(3, 4, rng)
    model = HmmModel(base.transition, np.full((3, 4), 0.25), base.initial)
    assert hmm_loglik(model, [0, 3, 2, 1, 1]) == pytest.approx(-5 * math.log(4), abs=1e-12)


@pytest.mark.parametrize("seed", range(100))
def test_forward_matches_path_enumeration(seed):
    model, obs = small_case(seed)
    want = hmm_likelihood(model.transition, model.emission, model.initial, obs)
    ev = hmm_evaluate(model, obs)
    assert math.exp(ev.loglik) == pytest.approx(want, rel=1e-10, abs=1e-300)
    assert abs(ev.loglik - ev.loglik_backward) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 60))
def test_forward_backward_consistency(seed, length):
    rng = np.random.default_rng(seed)
    model = random_hmm(3, 4, rng)
    _, obs = sample_hmm(model, length, rng)
    ev = hmm_evaluate(model, obs)
    assert np.allclose((ev.forward * ev.backward).sum(axis=1), 1.0, atol=1e-9)
    assert np.allclose(ev.posteriors().sum(axis=1), 1.0, atol=1e-9)
    path, logp = hmm_viterbi(model, obs)
    assert logp <= ev.loglik + 1e-12
    assert path.shape == (length,)


@pytest.mark.parametrize("seed", range(30))
def test_viterbi_matches_enumeration(seed):
    rng = np.random.default_rng(1000 + seed)
    model = random_hmm(3, 3, rng)
    obs = rng.integers(0, 3, size=5)
    path, logp = hmm_viterbi(model, obs)
    want_path, want_p = hmm_best_path(model.transition, model.emission, model.initial, obs)
    assert tuple(path) == want_path
    assert logp == pytest.approx(math.log(want_p), abs=1e-12)


def test_viterbi_deterministic_chain():
    a = np.roll(np.eye(3), 1, axis=1)
    model = HmmModel(a, np.eye(3), np.eye(3)[0])
    path, logp = hmm_viterbi(model, [0, 1, 2, 0])
    assert path.tolist() == [0, 1, 2, 0]
    assert logp == 0.0


def test_viterbi_tie_is_lexicographically_smallest():
    model = HmmModel(np.full((2, 2), 0.5), np.full((2, 2), 0.5), [0.5, 0.5])
    path, _ = hmm_viterbi(model, [0, 1, 0])
    assert path.tolist() == [0, 0, 0]


def test_symbol_out_of_range():
    model = random_hmm(2, 3, np.random.default_rng(0))
    with pytest.raises(ArgumentError):
        hmm_evaluate(model, [0, 3])
    with pytest.raises(ArgumentError):
        hmm_viterbi(model, [])


def test_model_validation():
    with pytest.raises(ArgumentError):
        HmmModel([[0.5, 0.4], [0.5, 0.5]], [[1.0], [1.0]], [0.5, 0.5])
    with pytest.raises(ArgumentError):
        HmmModel([[1.0]], [[1.0]], [0.9])


def test_single_iteration_matches_expected_counts():
    rng = np.random.default_rng(5)
    model = random_hmm(2, 3, rng)
    seqs = [np.array([0, 2, 1, 1]), np.array([2, 2, 0])]
    init = np.zeros(2)
    trans = np.zeros((2, 2))
    emis = np.zeros((2, 3))
    for o in seqs:
        i, t, e = hmm_expected_counts(model.transition, model.emission, model.initial, o)
        init, trans, emis = init + i, trans + t, emis + e
    fit = hmm_fit(model, seqs, max_iters=1, tol=0.0, smoothing=0.0)
    assert np.allclose(fit.model.initial, init / init.sum(), atol=1e-9)
    assert np.allclose(fit.model.transition, trans / trans.sum(1, keepdims=True), atol=1e-9)
    assert np.allclose(fit.model.emission, emis / emis.sum(1, keepdims=True), atol=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_baum_welch_monotone(seed):
    rng = np.random.default_rng(seed)
    truth = random_hmm(3, 4, rng)
    seqs = [sample_hmm(truth, 40, rng)[1] for _ in range(5)]
    fit = hmm_fit(random_hmm(3, 4, rng), seqs, max_iters=20, tol=0.0)
    hist = np.array(fit.loglik_history)
    assert np.all(np.diff(hist) >= -1e-9)
    for m in (fit.model.transition, fit.model.emission, fit.model.initial[None]):
        assert np.allclose(m.sum(axis=1), 1, atol=1e-9)


def test_recovers_one_hot_generator():
    a = np.roll(np.eye(3), 1, axis=1)
    truth = HmmModel(a, np.eye(3), np.eye(3)[0])
    rng = np.random.default_rng(3)
    seqs = [sample_hmm(truth, 30, rng)[1] for _ in range(4)]
    fit = hmm_fit(random_hmm(3, 3, np.random.default_rng(1)), seqs, max_iters=20)
    assert fit.model.emission.max(axis=1).min() > 0.99
    assert fit.model.transition.max(axis=1).min() > 0.99


def test_converged_model_is_a_fixed_point():
    a = np.roll(np.eye(3), 1, axis=1)
    truth = HmmModel(a, np.eye(3), np.eye(3)[0])
    seqs = [np.array([0, 1, 2, 0, 1])]
    fit = hmm_fit(truth, seqs, max_iters=1, tol=1e-4)
    assert fit.last_change < 1e-4
    assert fit.converged


def test_train_needs_data():
    with pytest.raises(ArgumentError):
        hmm_train(random_hmm(2, 2, np.random.default_rng(0)), [])


def test_left_right_topology():
    m = random_hmm(4, 3, np.random.default_rng(0), left_right=True)
    assert np.all(np.tril(m.transition, -1) == 0)
    assert m.initial[0] == 1.0
