import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.cluster.hierarchy import inconsistent, linkage

from oracles import centroid_linkage_naive
from vidcpd import InvalidInput
from vidcpd.bovw import Codebook
from vidcpd.condense import (BinAssignment, agglomerate, condense_codebook, condense_series,
                             cut_by_inconsistency, inconsistency)
from vidcpd.series import HistogramSeries


class TestAgglomerate:
    def test_hand_example(self):
        t = agglomerate([0.0, 1.0, 10.0])
        assert sorted(t.leaves(3)) == [0, 1]
        np.testing.assert_allclose(t.height, [1.0, 9.5])

    def test_two_points(self):
        t = agglomerate([[0.0, 0.0], [3.0, 4.0]])
        assert len(t) == 1 and t.height[0] == pytest.approx(5.0)

    def test_needs_two(self):
        with pytest.raises(InvalidInput):
            agglomerate([[1.0]])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 12))
    def test_matches_naive_centroid_linkage(self, seed, m):
        pts = np.random.default_rng(seed).normal(size=(m, 3))
        t = agglomerate(pts)
        naive = centroid_linkage_naive(pts)
        assert len(t) == m - 1
        for i, (_, _, h, members) in enumerate(naive):
            assert t.height[i] == pytest.approx(h, rel=1e-9, abs=1e-12)
            assert t.leaves(m + i) == members


class TestInconsistency:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(3, 15), st.integers(1, 4))
    def test_population_std_version_of_reference(self, seed, m, depth):
        # The reference table uses the sample std; rescale it to the population std.
        pts = np.random.default_rng(seed).normal(size=(m, 2))
        R = inconsistent(linkage(pts, "centroid"), depth)
        mean, sd1, count = R[:, 0], R[:, 1], R[:, 2]
        Z = linkage(pts, "centroid")
        pop = sd1 * np.sqrt(np.maximum(count - 1, 0) / count)
        want = np.where(pop > 0, (Z[:, 2] - mean) / np.where(pop > 0, pop, 1), 0.0)
        np.testing.assert_allclose(inconsistency(agglomerate(pts), depth), want, atol=1e-9)

    def test_hand_example_value(self):
        # heights {1, 9.5}: mean 5.25, population std 4.25, coefficient exactly 1
        np.testing.assert_allclose(inconsistency(agglomerate([0.0, 1.0, 10.0]), 2), [0.0, 1.0])


class TestCut:
    def test_hand_example(self):
        a = cut_by_inconsistency(agglomerate([0.0, 1.0, 10.0]), 1.0, depth=2)
        assert a.n_bins == 2 and a.mapping.tolist() == [0, 0, 1]

    def test_infinite_cutoff_one_bin(self):
        pts = np.random.default_rng(0).normal(size=(9, 2))
        assert cut_by_inconsistency(agglomerate(pts), np.inf).n_bins == 1

    def test_tiny_cutoff_all_singletons(self):
        # every merge inconsistent: heights strictly growing chain
        t = agglomerate([0.0, 1.0, 3.0, 7.0, 15.0])
        coef = inconsistency(t)
        assert np.all(coef[1:] > 0)
        a = cut_by_inconsistency(t, 1e-12)
        # the first merge has coefficient 0 (< cutoff) so 0 and 1 may merge; nothing else
        assert a.n_bins == 4

    def test_negative_cutoff_all_singletons(self):
        t = agglomerate([0.0, 1.0, 3.0, 7.0, 15.0])
        assert cut_by_inconsistency(t, -1.0).n_bins == 5

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.0, 2.0))
    def test_clusters_are_closed_subtrees(self, seed, cutoff):
        pts = np.random.default_rng(seed).normal(size=(10, 2))
        t = agglomerate(pts)
        a = cut_by_inconsistency(t, cutoff)
        # every bin is exactly the leaf set of some tree node
        nodes = [sorted(t.leaves(v)) for v in range(10 + len(t))]
        for b in range(a.n_bins):
            assert sorted(np.flatnonzero(a.mapping == b).tolist()) in nodes
        # numbering follows the smallest member
        firsts = [int(np.flatnonzero(a.mapping == b)[0]) for b in range(a.n_bins)]
        assert firsts == sorted(firsts)


class TestBinAssignment:
    def test_must_be_surjective(self):
        with pytest.raises(InvalidInput):
            BinAssignment([0, 0, 2], 3)

    def test_state_separation(self):
        with pytest.raises(InvalidInput):
            BinAssignment([0, 0, 1, 1], 2, states=[0, 1, 1, 1])

    def test_condense_codebook_never_mixes_states(self):
        rng = np.random.default_rng(3)
        cb = Codebook(rng.normal(size=(12, 4)), 6)
        for cutoff in (0.0, 0.5, 1.0, np.inf):
            a = condense_codebook(cb, cutoff)
            for b in range(a.n_bins):
                assert np.unique(cb.state_of_centroid[a.mapping == b]).size == 1
        assert condense_codebook(cb, np.inf).n_bins == 2


class TestCondenseSeries:
    def test_identity(self):
        F = np.random.default_rng(0).poisson(4, size=(6, 5)).astype(float)
        h = HistogramSeries(F)
        np.testing.assert_array_equal(condense_series(h, BinAssignment.identity(5)).frames, F)

    def test_all_to_one(self):
        F = np.random.default_rng(1).random((6, 5))
        out = condense_series(HistogramSeries(F), BinAssignment(np.zeros(5, int), 1))
        np.testing.assert_allclose(out.frames[:, 0], F.sum(axis=1))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000))
    def test_scatter_add_oracle_and_mass(self, seed):
        rng = np.random.default_rng(seed)
        C = int(rng.integers(2, 9))
        B = int(rng.integers(1, C + 1))
        mapping = np.r_[np.arange(B), rng.integers(0, B, C - B)]
        rng.shuffle(mapping)
        F = rng.poisson(3, size=(7, C)).astype(float)
        out = condense_series(HistogramSeries(F), BinAssignment(mapping, B)).frames
        want = np.zeros((7, B))
        for t in range(7):
            for c in range(C):
                want[t, mapping[c]] += F[t, c]
        np.testing.assert_array_equal(out, want)
        np.testing.assert_array_equal(out.sum(axis=1), F.sum(axis=1))

    def test_length_mismatch(self):
        with pytest.raises(InvalidInput):
            condense_series(HistogramSeries(np.ones((3, 4))), BinAssignment.identity(3))
