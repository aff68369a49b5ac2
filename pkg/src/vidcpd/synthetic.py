"""Seeded ground-truth generator: two-state latent paths with Gaussian scores,
label noise of a given accuracy, and Poisson histogram frames.

Every random draw comes from numpy's PCG64 generator, seeded with
``[seed, stream]`` so that states, scores, labels and histograms use
independent streams of one seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import norm

from .errors import InvalidParameter
from .series import ChangePointSet, HistogramSeries, LabelSeries, ScoreSeries, threshold_labels

__all__ = [
    "RNG_NAME",
    "SynthSpec",
    "SyntheticVideo",
    "gen_states",
    "gen_scores",
    "gen_labels",
    "gen_histograms",
    "separation_for_accuracy",
    "benchmark_corpus",
    "change_count_probs",
]

RNG_NAME = "numpy-PCG64-SeedSequence(seed,stream)-v1"
_STATES, _SCORES, _LABELS, _HISTS, _CORPUS = range(5)


def _rng(seed, stream):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), stream])))


@dataclass(frozen=True)
class SynthSpec:
    """Either ``change_indices`` (explicit, strictly increasing) or ``transition`` drives the path."""

    n: int
    change_indices: Optional[Sequence[int]] = None
    transition: Optional[Sequence[Sequence[float]]] = None
    initial_state: int = 0
    score_means: tuple = (-1.0, 1.0)
    score_sigma: tuple = (1.0, 1.0)
    label_accuracy: float = 0.9
    hist_profiles: Optional[Sequence[Sequence[float]]] = None
    seed: int = 0
    sample_period: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameter("n must be positive")
        if self.change_indices is not None:
            idx = np.asarray(self.change_indices, dtype=int)
            if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 1 or idx[-1] >= self.n):
                raise InvalidParameter("change indices must be strictly increasing within 1..n-1")
        elif self.transition is not None:
            T = np.asarray(self.transition, dtype=float)
            if T.shape != (2, 2) or np.any(T < 0) or not np.allclose(T.sum(axis=1), 1):
                raise InvalidParameter("transition must be a 2x2 row-stochastic matrix")
        if self.initial_state not in (0, 1):
            raise InvalidParameter("initial_state must be 0 or 1")
        if np.any(np.asarray(self.score_sigma) < 0):
            raise InvalidParameter("score_sigma must be nonnegative")
        if not 0.5 < self.label_accuracy <= 1:
            raise InvalidParameter("label_accuracy must lie in (0.5, 1]")
        if self.hist_profiles is not None:
            P = np.asarray(self.hist_profiles, dtype=float)
            if P.ndim != 2 or P.shape[0] != 2 or np.any(P < 0):
                raise InvalidParameter("hist_profiles must be a nonnegative (2, B) array")


def gen_states(spec: SynthSpec):
    """Latent 0/1 path and its true change-point times."""
    n = spec.n
    if spec.change_indices is not None:
        idx = np.asarray(spec.change_indices, dtype=int)
        states = np.zeros(n, dtype=np.int8)
        for k in range(idx.size):
            states[idx[k]:] = (spec.initial_state + k + 1) % 2
        if not idx.size:
            states[:] = spec.initial_state
        else:
            states[:idx[0]] = spec.initial_state
    else:
        T = np.asarray(spec.transition if spec.transition is not None else np.eye(2), dtype=float)
        u = _rng(spec.seed, _STATES).random(n)
        states = np.empty(n, dtype=np.int8)
        states[0] = spec.initial_state
        for t in range(1, n):
            prev = states[t - 1]
            states[t] = prev if u[t] < T[prev, prev] else 1 - prev
    changes = np.flatnonzero(states[1:] != states[:-1]) + 1
    truth = ChangePointSet(spec.origin + changes * spec.sample_period, "truth")
    return states, truth


def gen_scores(states, spec: SynthSpec) -> ScoreSeries:
    states = np.asarray(states, dtype=int)
    mu = np.asarray(spec.score_means, dtype=float)[states]
    sd = np.asarray(spec.score_sigma, dtype=float)[states]
    x = mu + sd * _rng(spec.seed, _SCORES).standard_normal(states.size)
    return ScoreSeries(x, spec.sample_period, spec.origin)


def gen_labels(states, p: float, seed: int, sample_period: float = 1.0,
               origin: float = 0.0) -> LabelSeries:
    """Each label equals the state with probability ``p``, independently."""
    if not 0.5 < p <= 1:
        raise InvalidParameter("p must lie in (0.5, 1]")
    states = np.asarray(states, dtype=np.int8)
    flip = _rng(seed, _LABELS).random(states.size) >= p
    return LabelSeries(np.where(flip, 1 - states, states), sample_period, origin)


def gen_histograms(states, spec: SynthSpec, seed: Optional[int] = None) -> HistogramSeries:
    """Poisson counts with per-bin mean equal to the profile of the current state."""
    if spec.hist_profiles is None:
        raise InvalidParameter("spec has no hist_profiles")
    P = np.asarray(spec.hist_profiles, dtype=float)
    lam = P[np.asarray(states, dtype=int)]
    rng = _rng(spec.seed if seed is None else seed, _HISTS)
    return HistogramSeries(rng.poisson(lam).astype(float), spec.sample_period, spec.origin)


def separation_for_accuracy(accuracy: float, sigma: float = 1.0) -> float:
    """Half-distance between state means giving ``accuracy`` when thresholding at 0."""
    return float(sigma * norm.ppf(accuracy))


@dataclass
class SyntheticVideo:
    video_id: str
    states: np.ndarray
    scores: ScoreSeries
    labels: LabelSeries
    truth: ChangePointSet
    spec: SynthSpec = field(repr=False)


def _spaced_indices(rng, k, n, min_gap):
    # k sorted indices in [min_gap, n - min_gap] with pairwise spacing >= min_gap
    slack = n - 2 * min_gap - (k - 1) * min_gap
    if k == 0:
        return np.zeros(0, dtype=int)
    if slack < 0:
        raise InvalidParameter("too many change-points for the requested spacing")
    base = np.sort(rng.integers(0, slack + 1, size=k))
    return base + min_gap + min_gap * np.arange(k)


ZERO_CHANGE_FRACTION = 271 / 691


def change_count_probs(max_changes: int = 11, zero_fraction: float = ZERO_CHANGE_FRACTION,
                       ratio: float = 0.5) -> np.ndarray:
    """P(k) for k = 0..max_changes: a point mass at 0, geometric decay on 1..max_changes."""
    tail = ratio ** np.arange(max_changes)
    return np.concatenate([[zero_fraction], (1 - zero_fraction) * tail / tail.sum()])


def benchmark_corpus(n_videos: int = 100, seed: int = 0, length: int = 540,
                     max_changes: int = 11, accuracy: float = 0.94,
                     min_gap: int = 20, sample_period: float = 1.0,
                     count_probs: Optional[Sequence[float]] = None):
    """Corpus shaped like the body-worn-video benchmark.

    ``length`` samples at ``sample_period`` seconds (9 minutes at 1 Hz), each
    video with a number of change-points in ``0..max_changes`` drawn from
    ``count_probs`` (default :func:`change_count_probs`; pass a uniform
    vector for a flat spread), spaced at least ``min_gap`` samples apart, a random
    starting state, and unit-variance Gaussian scores whose means sit at
    ``-/+ separation_for_accuracy(accuracy)`` so that thresholding at 0 is
    ``accuracy`` accurate. Labels are the thresholded scores.
    """
    rng = _rng(seed, _CORPUS)
    m = separation_for_accuracy(accuracy)
    probs = change_count_probs(max_changes) if count_probs is None else np.asarray(count_probs, float)
    if probs.size != max_changes + 1 or np.any(probs < 0) or not np.isclose(probs.sum(), 1):
        raise InvalidParameter("count_probs must be a distribution over 0..max_changes")
    videos = []
    for v in range(n_videos):
        k = int(rng.choice(max_changes + 1, p=probs / probs.sum()))
        idx = _spaced_indices(rng, k, length, min_gap)
        spec = SynthSpec(n=length, change_indices=idx.tolist(),
                         initial_state=int(rng.integers(0, 2)),
                         score_means=(-m, m), score_sigma=(1.0, 1.0),
                         label_accuracy=accuracy, seed=int(rng.integers(2 ** 31)),
                         sample_period=sample_period)
        states, truth = gen_states(spec)
        scores = gen_scores(states, spec)
        videos.append(SyntheticVideo(f"video{v:03d}", states, scores,
                                     threshold_labels(scores), truth, spec))
    return videos
