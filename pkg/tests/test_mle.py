import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import mle_brute
from vidcpd import InvalidParameter, LabelSeries, ScoreSeries
from vidcpd.detect import MleConfig, mle_detect, mle_segment
from vidcpd.detect.mle import label_loglik


def switches(L):
    return int(np.sum(L[1:] != L[:-1]))


def test_follows_labels_when_allowed():
    L, ll = mle_segment([0, 0, 1, 1], 0.9, 2)
    assert L.tolist() == [0, 0, 1, 1]
    assert ll == pytest.approx(4 * math.log(0.9))


def test_no_switches_gives_majority():
    L, _ = mle_segment([0, 1, 0, 1, 0], 0.9, 1)
    assert L.tolist() == [0] * 5


def test_large_m_reproduces_input():
    x = np.random.default_rng(0).integers(0, 2, 30)
    L, _ = mle_segment(x, 0.8, 31)
    assert np.array_equal(L, x)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=12), st.integers(1, 4),
       st.sampled_from([0.6, 0.75, 0.9, 0.99]))
def test_matches_brute_force(x, M, p):
    L, ll = mle_segment(x, p, M)
    assert ll == pytest.approx(mle_brute(x, p, M), abs=1e-9)
    assert switches(L) < M
    assert label_loglik(x, L, p) == pytest.approx(ll, abs=1e-9)


def test_tie_prefers_label_zero():
    # one sample, no switches: both labels disagree with half the data
    L, _ = mle_segment([0, 1], 0.9, 1)
    assert L.tolist() == [0, 0]


def test_detect_reports_first_index_of_new_label():
    x = np.r_[np.zeros(20), np.ones(15), np.zeros(10)].astype(int)
    labels, cps = mle_detect(LabelSeries(x, sample_period=0.5))
    assert np.array_equal(labels, x)
    assert cps.times.tolist() == [10.0, 17.5]
    assert cps.detector == "mle"


def test_scores_are_thresholded():
    x = np.r_[np.full(10, -2.0), np.full(10, 3.0)]
    _, cps = mle_detect(ScoreSeries(x))
    assert cps.times.tolist() == [10.0]


def test_switch_cap():
    x = np.tile([0, 1], 20)
    L, _ = mle_segment(x, 0.9, 10)
    assert switches(L) <= 9


@pytest.mark.parametrize("kw", [dict(p=0.5), dict(p=1.0), dict(M=0), dict(M=2.5)])
def test_invalid(kw):
    with pytest.raises(InvalidParameter):
        MleConfig(**kw)
