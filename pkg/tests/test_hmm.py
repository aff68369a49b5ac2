import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import hmm_posteriors, viterbi_brute, viterbi_path_logprob
from vidcpd import InvalidInput, InvalidParameter, ScoreSeries
from vidcpd.detect import HmmParams, forward_backward, hmm_detect, hmm_fit, viterbi


def random_params(rng):
    a, b = rng.uniform(0.55, 0.99, 2)
    p0 = rng.uniform(0.1, 0.9)
    return HmmParams([p0, 1 - p0], [[a, 1 - a], [1 - b, b]],
                     np.sort(rng.normal(0, 1.5, 2)), rng.uniform(0.3, 1.5, 2))


def markov_sample(seed, n, mu=(-1.0, 1.0), sigma=0.3, stay=0.98):
    rng = np.random.default_rng(seed)
    s = np.empty(n, dtype=int)
    s[0] = rng.integers(2)
    u = rng.random(n)
    for t in range(1, n):
        s[t] = s[t - 1] if u[t] < stay else 1 - s[t - 1]
    return s, np.asarray(mu)[s] + sigma * rng.standard_normal(n)


class TestParams:
    def test_validation(self):
        with pytest.raises(InvalidParameter):
            HmmParams([0.5, 0.6], np.eye(2), [0, 1], [1, 1])
        with pytest.raises(InvalidParameter):
            HmmParams([0.5, 0.5], [[0.5, 0.6], [0, 1]], [0, 1], [1, 1])
        with pytest.raises(InvalidParameter):
            HmmParams([0.5, 0.5], np.eye(2), [0, 1], [1, 0])


class TestForwardBackward:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 100_000), st.integers(1, 10))
    def test_matches_path_enumeration(self, seed, n):
        rng = np.random.default_rng(seed)
        P = random_params(rng)
        x = rng.normal(0, 1.5, n)
        gamma, xi, ll = forward_backward(x, P)
        g2, xi2, ll2 = hmm_posteriors(x, P.pi, P.A, P.mu, P.sigma)
        np.testing.assert_allclose(gamma, g2, atol=1e-9)
        np.testing.assert_allclose(xi, xi2, atol=1e-9)
        assert ll == pytest.approx(ll2, abs=1e-9)

    def test_long_series_no_underflow(self):
        _, x = markov_sample(0, 20_000)
        P = HmmParams([0.5, 0.5], [[0.98, 0.02], [0.02, 0.98]], [-1, 1], [0.3, 0.3])
        gamma, _, ll = forward_backward(x, P)
        assert np.isfinite(ll) and np.allclose(gamma.sum(axis=1), 1)


class TestViterbi:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 100_000), st.integers(1, 10))
    def test_matches_exhaustive(self, seed, n):
        rng = np.random.default_rng(seed)
        P = random_params(rng)
        x = rng.normal(0, 1.5, n)
        path = viterbi(x, P)
        best_path, best = viterbi_brute(x, P.pi, P.A, P.mu, P.sigma)
        assert viterbi_path_logprob(path, x, P.pi, P.A, P.mu, P.sigma) == pytest.approx(best, abs=1e-9)
        assert np.array_equal(path, best_path)

    def test_separated_emissions_recover_states(self):
        s, _ = markov_sample(3, 200)
        x = np.where(s == 0, -1.0, 1.0) + 1e-4 * np.random.default_rng(1).standard_normal(200)
        P = HmmParams([0.5, 0.5], [[0.9, 0.1], [0.1, 0.9]], [-1, 1], [0.01, 0.01])
        assert np.array_equal(viterbi(x, P), s)

    def test_ambiguous_constant_input_gives_constant_path(self):
        P = HmmParams([0.5, 0.5], [[0.8, 0.2], [0.2, 0.8]], [-1, 1], [1, 1])
        path = viterbi(np.zeros(30), P)
        assert np.unique(path).size == 1


class TestFit:
    def test_monotone_and_recovers(self):
        _, x = markov_sample(5, 5000)
        P = hmm_fit(ScoreSeries(x), seed=0)
        h = np.array(P.loglik_history)
        assert np.all(np.diff(h) >= -1e-9)
        np.testing.assert_allclose(P.mu, [-1, 1], atol=0.1)
        np.testing.assert_allclose(np.diag(P.A), 0.98, atol=0.03)
        assert P.mu[0] < P.mu[1]

    def test_one_step_from_truth_does_not_decrease(self):
        _, x = markov_sample(6, 2000)
        truth = HmmParams([0.5, 0.5], [[0.98, 0.02], [0.02, 0.98]], [-1, 1], [0.3, 0.3])
        P = hmm_fit(x, init=truth, max_iter=1)
        assert P.loglik_history[1] >= P.loglik_history[0] - 1e-9

    def test_reported_loglik_matches_params(self):
        _, x = markov_sample(7, 800)
        P = hmm_fit(x, seed=1)
        assert forward_backward(x, P)[2] == pytest.approx(P.loglik, rel=1e-9)

    def test_pooled_series(self):
        parts = [markov_sample(s, 600)[1] for s in range(4)]
        P = hmm_fit([ScoreSeries(p) for p in parts], seed=0)
        np.testing.assert_allclose(P.mu, [-1, 1], atol=0.1)

    def test_constant_series_is_flagged(self):
        P = hmm_fit(np.full(50, 2.0))
        assert P.degenerate and np.all(P.sigma == 1e-3)

    def test_deterministic(self):
        _, x = markov_sample(8, 500)
        a, b = hmm_fit(x, seed=3), hmm_fit(x, seed=3)
        assert a.loglik_history == b.loglik_history

    def test_too_short(self):
        with pytest.raises(InvalidInput):
            hmm_fit(np.array([1.0, 2.0, 3.0]))


class TestDetect:
    P = HmmParams([0.5, 0.5], [[0.99, 0.01], [0.01, 0.99]], [-1, 1], [0.5, 0.5])

    def test_constant_state(self):
        assert len(hmm_detect(ScoreSeries(np.full(40, -1.0)), self.P)) == 0

    def test_one_switch(self):
        x = np.r_[np.full(50, -1.0), np.full(50, 1.0)]
        cps = hmm_detect(ScoreSeries(x), self.P)
        assert cps.times.tolist() == [50.0] and cps.detector == "hmm"

    def test_two_changes_found(self):
        hits = 0
        for seed in range(50):
            rng = np.random.default_rng(seed)
            s = np.repeat([0, 1, 0], [100, 100, 100])
            x = np.where(s == 0, -1.0, 1.0) + rng.standard_normal(300)
            cps = hmm_detect(ScoreSeries(x), self.P)
            hits += all(any(abs(t - c) <= 10 for t in cps.times) for c in (100, 200))
        assert hits >= 45
