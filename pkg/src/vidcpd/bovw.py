"""Bag-of-visual-words: per-state codebooks, hard/soft vector quantization,
spatial pyramids and the pyramid match kernel.

Descriptors are precomputed (e.g. 128-d SIFT rows); this module starts from
the descriptor matrix of each frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidInput, InvalidParameter

__all__ = [
    "DescriptorSet",
    "Codebook",
    "PyramidDescriptor",
    "KMeansResult",
    "kmeans_fit",
    "build_codebook",
    "pairwise_distances",
    "hard_vq",
    "soft_vq",
    "hard_assign",
    "soft_assign",
    "pyramid_weights",
    "build_pyramid",
    "pyramid_match_kernel",
]

NEGATIVE, POSITIVE = 0, 1


@dataclass(frozen=True, eq=False)
class DescriptorSet:
    """Descriptors of one frame plus optional positions normalized to [0, 1]^2."""

    vectors: np.ndarray
    positions: Optional[np.ndarray] = None

    def __post_init__(self):
        vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if vectors.ndim != 2 or vectors.shape[1] < 1:
            raise InvalidInput("descriptors must form an (F, d) array with d >= 1")
        object.__setattr__(self, "vectors", vectors)
        if self.positions is not None:
            pos = np.asarray(self.positions, dtype=float).reshape(-1, 2)
            if pos.shape[0] != vectors.shape[0]:
                raise InvalidInput("positions must have one row per descriptor")
            if np.any(pos < 0) or np.any(pos > 1):
                raise InvalidInput("positions must lie in [0, 1]^2")
            object.__setattr__(self, "positions", pos)

    @classmethod
    def from_pixels(cls, vectors, xy, width, height) -> "DescriptorSet":
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        scale = np.array([width, height], dtype=float)
        return cls(vectors, np.clip(xy / scale, 0.0, 1.0))

    def __len__(self):
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True, eq=False)
class Codebook:
    """2K centroids: rows [0, K) from the negative state, [K, 2K) from the positive."""

    centroids: np.ndarray
    per_state_count: int

    def __post_init__(self):
        c = np.asarray(self.centroids, dtype=float)
        if c.ndim != 2 or c.shape[0] != 2 * self.per_state_count or self.per_state_count < 1:
            raise InvalidInput("codebook must hold exactly 2K centroid rows")
        object.__setattr__(self, "centroids", c)

    @property
    def size(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    @property
    def state_of_centroid(self) -> np.ndarray:
        k = self.per_state_count
        return np.repeat([NEGATIVE, POSITIVE], k)


@dataclass
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    objective_history: list = field(default_factory=list)
    n_iter: int = 0

    @property
    def objective(self) -> float:
        return self.objective_history[-1]


def pairwise_distances(x: np.ndarray, c: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Euclidean distances, computed from explicit differences so exact ties stay ties."""
    x = np.asarray(x, dtype=float)
    c = np.asarray(c, dtype=float)
    out = np.empty((x.shape[0], c.shape[0]))
    for start in range(0, x.shape[0], chunk):
        diff = x[start:start + chunk, None, :] - c[None, :, :]
        out[start:start + chunk] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return out


def _plusplus_init(x, k, rng):
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            # every remaining point duplicates a chosen one
            free = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(free))
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((x - x[nxt]) ** 2, axis=1))
    return x[chosen].copy()


def kmeans_fit(descriptors, K: int, seed: int = 0, max_iter: int = 300) -> KMeansResult:
    """Lloyd's algorithm from distance-weighted (k-means++) seeding.

    The objective (sum of squared distances to the assigned centroid) is
    recorded after every assignment step and never increases. A cluster that
    loses all its points is reseeded with the point farthest from its
    current centroid.
    """
    x = np.atleast_2d(np.asarray(descriptors, dtype=float))
    if x.size == 0:
        raise InvalidInput("cannot cluster an empty descriptor set")
    if int(K) != K or K < 1:
        raise InvalidParameter(f"K must be a positive integer, got {K}")
    if x.shape[0] < K:
        raise InvalidParameter(f"need at least K={K} descriptors, got {x.shape[0]}")
    if max_iter < 1:
        raise InvalidParameter("max_iter must be positive")
    rng = np.random.default_rng(seed)
    centroids = _plusplus_init(x, int(K), rng)
    labels = None
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        d = pairwise_distances(x, centroids)
        new_labels = np.argmin(d, axis=1)
        own = d[np.arange(x.shape[0]), new_labels]
        counts = np.bincount(new_labels, minlength=K)
        for j in np.flatnonzero(counts == 0):
            far = int(np.argmax(own))
            new_labels[far] = j
            centroids[j] = x[far]
            own[far] = 0.0
            counts = np.bincount(new_labels, minlength=K)
        history.append(float(np.sum(own ** 2)))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(K):
            centroids[j] = x[labels == j].mean(axis=0)
    return KMeansResult(centroids, labels, history, it)


def build_codebook(neg: DescriptorSet, pos: DescriptorSet, K: int, seed: int = 0,
                   max_iter: int = 300) -> Codebook:
    """Cluster each state's descriptors separately and stack negative then positive."""
    neg_x = neg.vectors if isinstance(neg, DescriptorSet) else np.atleast_2d(neg)
    pos_x = pos.vectors if isinstance(pos, DescriptorSet) else np.atleast_2d(pos)
    if neg_x.shape[1] != pos_x.shape[1]:
        raise InvalidInput("negative and positive descriptors differ in dimension")
    seeds = np.random.SeedSequence(seed).spawn(2)
    c_neg = kmeans_fit(neg_x, K, seeds[0], max_iter).centroids
    c_pos = kmeans_fit(pos_x, K, seeds[1], max_iter).centroids
    return Codebook(np.vstack([c_neg, c_pos]), int(K))


def _vectors(d):
    return d.vectors if isinstance(d, DescriptorSet) else np.atleast_2d(np.asarray(d, dtype=float))


def _centroids(cb):
    return cb.centroids if isinstance(cb, Codebook) else np.atleast_2d(np.asarray(cb, dtype=float))


def hard_assign(d, cb) -> np.ndarray:
    """One-hot (F, C) membership to the nearest centroid, lowest index on ties."""
    x, c = _vectors(d), _centroids(cb)
    if x.shape[1] != c.shape[1]:
        raise InvalidInput("descriptor dimension does not match the codebook")
    nearest = np.argmin(pairwise_distances(x, c), axis=1)
    out = np.zeros((x.shape[0], c.shape[0]))
    out[np.arange(x.shape[0]), nearest] = 1.0
    return out


def soft_assign(d, cb, E: float) -> np.ndarray:
    """Per-descriptor soft memberships; each row sums to 1.

    Distances are rescaled to [0, 1] per descriptor (closest centroid 0,
    farthest 1), decayed by ``exp(-E * r)`` and normalized. If every centroid
    is equidistant the descriptor spreads uniformly.
    """
    x, c = _vectors(d), _centroids(cb)
    if c.shape[0] < 2:
        raise InvalidParameter("soft VQ needs at least two centroids")
    if not E > 0:
        raise InvalidParameter(f"E must be positive, got {E}")
    if x.shape[1] != c.shape[1]:
        raise InvalidInput("descriptor dimension does not match the codebook")
    dist = pairwise_distances(x, c)
    lo = dist.min(axis=1, keepdims=True)
    span = dist.max(axis=1, keepdims=True) - lo
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(span > 0, (dist - lo) / np.where(span > 0, span, 1.0), 0.0)
    w = np.exp(-E * rel)
    return w / w.sum(axis=1, keepdims=True)


def hard_vq(d, cb) -> np.ndarray:
    """Hard BoVW histogram: counts of nearest-centroid assignments."""
    return hard_assign(d, cb).sum(axis=0)


def soft_vq(d, cb, E: float) -> np.ndarray:
    """Soft BoVW histogram; sums to the number of descriptors."""
    return soft_assign(d, cb, E).sum(axis=0)


def pyramid_weights(L: int) -> np.ndarray:
    """Level weights: 1/2^L for level 0, 1/2^(L-l+1) for level l >= 1."""
    if L < 0:
        raise InvalidParameter("L must be nonnegative")
    w = [1.0 / 2 ** L] + [1.0 / 2 ** (L - l + 1) for l in range(1, L + 1)]
    return np.array(w)


@dataclass(frozen=True, eq=False)
class PyramidDescriptor:
    levels: tuple  # weighted (4**l, C) arrays, level 0 first
    weights: np.ndarray

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([lv.reshape(-1) for lv in self.levels])

    @property
    def n_bins(self) -> int:
        return self.levels[0].shape[1]

    @property
    def L(self) -> int:
        return len(self.levels) - 1


def _cells(pos: np.ndarray, level: int) -> np.ndarray:
    side = 2 ** level
    col = np.minimum(np.floor(pos[:, 0] * side).astype(int), side - 1)
    row = np.minimum(np.floor(pos[:, 1] * side).astype(int), side - 1)
    return row * side + col


def build_pyramid(d: DescriptorSet, cb, L: int = 2, vq_mode: str = "hard",
                  E: float = 35.0) -> PyramidDescriptor:
    """Spatial pyramid of per-cell BoVW histograms, weighted by level.

    Level ``l`` splits the frame into a 2^l x 2^l grid; cells are ordered
    row-major. A position on the right/bottom edge (1.0) falls in the last
    cell.
    """
    if not isinstance(d, DescriptorSet) or d.positions is None:
        raise InvalidInput("spatial pyramid needs descriptor positions")
    if L not in (0, 1, 2):
        raise InvalidParameter(f"L must be 0, 1 or 2, got {L}")
    if vq_mode == "hard":
        member = hard_assign(d, cb)
    elif vq_mode == "soft":
        member = soft_assign(d, cb, E)
    else:
        raise InvalidParameter(f"unknown vq_mode {vq_mode!r}")
    weights = pyramid_weights(L)
    C = member.shape[1]
    levels = []
    for level in range(L + 1):
        cells = np.zeros((4 ** level, C))
        np.add.at(cells, _cells(d.positions, level), member)
        levels.append(weights[level] * cells)
    return PyramidDescriptor(tuple(levels), weights)


def pyramid_match_kernel(a: PyramidDescriptor, b: PyramidDescriptor) -> float:
    """Histogram intersection of two weighted pyramids."""
    if a.L != b.L or a.n_bins != b.n_bins or not np.allclose(a.weights, b.weights):
        raise InvalidInput("pyramids differ in shape")
    return float(np.minimum(a.flat, b.flat).sum())
