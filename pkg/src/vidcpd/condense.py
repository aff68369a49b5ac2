"""Condensing BoVW histograms by clustering their centroids.

Centroids of each state are merged bottom-up with centroid linkage; the
resulting tree is cut where merges become inconsistent with the merges
below them, and every surviving cluster of visual words becomes one bin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.cluster.hierarchy import linkage

from .bovw import Codebook
from .errors import InvalidInput, InvalidParameter
from .series import HistogramSeries

__all__ = [
    "MergeTree",
    "BinAssignment",
    "agglomerate",
    "inconsistency",
    "cut_by_inconsistency",
    "condense_codebook",
    "condense_series",
]


@dataclass(frozen=True, eq=False)
class MergeTree:
    """Merge records in step order.

    Node ids follow the usual convention: leaves are ``0..M-1`` and the
    merge at step ``i`` creates node ``M + i``. Heights may decrease from one
    step to the next (centroid linkage can invert).
    """

    left: np.ndarray
    right: np.ndarray
    height: np.ndarray
    n_leaves: int

    def __len__(self):
        return self.height.size

    def children(self, node: int):
        i = node - self.n_leaves
        return int(self.left[i]), int(self.right[i])

    def leaves(self, node: int) -> list:
        if node < self.n_leaves:
            return [node]
        stack, out = [node], []
        while stack:
            v = stack.pop()
            if v < self.n_leaves:
                out.append(v)
            else:
                stack.extend(self.children(v))
        return sorted(out)


@dataclass(frozen=True, eq=False)
class BinAssignment:
    """Map from centroid index to condensed bin index."""

    mapping: np.ndarray
    n_bins: int
    states: Optional[np.ndarray] = None

    def __post_init__(self):
        m = np.asarray(self.mapping, dtype=int).reshape(-1)
        if m.size == 0:
            raise InvalidInput("empty bin assignment")
        if m.min() < 0 or m.max() >= self.n_bins:
            raise InvalidInput("bin index out of range")
        if np.unique(m).size != self.n_bins:
            raise InvalidInput("bin assignment must use every bin")
        object.__setattr__(self, "mapping", m)
        if self.states is not None:
            st = np.asarray(self.states, dtype=int).reshape(-1)
            if st.size != m.size:
                raise InvalidInput("states must align with the mapping")
            for b in range(self.n_bins):
                if np.unique(st[m == b]).size > 1:
                    raise InvalidInput(f"bin {b} mixes centroids from both states")
            object.__setattr__(self, "states", st)

    @property
    def n_centroids(self) -> int:
        return self.mapping.size

    @classmethod
    def identity(cls, n: int) -> "BinAssignment":
        return cls(np.arange(n), n)


def agglomerate(centroids, linkage_method: str = "centroid") -> MergeTree:
    """Bottom-up merging of the closest pair of clusters under centroid linkage."""
    x = np.asarray(centroids, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise InvalidInput("need at least two centroids to agglomerate")
    if linkage_method != "centroid":
        raise InvalidParameter("only centroid linkage is supported")
    Z = linkage(x, method="centroid", metric="euclidean")
    return MergeTree(Z[:, 0].astype(int), Z[:, 1].astype(int), Z[:, 2].copy(), x.shape[0])


def inconsistency(tree: MergeTree, depth: int = 2) -> np.ndarray:
    """Inconsistency coefficient of every merge.

    For each merge, take the heights of the merges within ``depth`` levels
    of it (itself included), and standardize its own height by their mean
    and population standard deviation. A zero spread gives 0.
    """
    if int(depth) != depth or depth < 1:
        raise InvalidParameter(f"depth must be a positive integer, got {depth}")
    M = tree.n_leaves
    coef = np.zeros(len(tree))
    for i in range(len(tree)):
        heights = []
        frontier = [M + i]
        for _ in range(depth):
            nxt = []
            for v in frontier:
                heights.append(tree.height[v - M])
                nxt.extend(c for c in tree.children(v) if c >= M)
            frontier = nxt
            if not frontier:
                break
        h = np.asarray(heights)
        sd = h.std()
        coef[i] = (tree.height[i] - h.mean()) / sd if sd > 0 else 0.0
    return coef


def cut_by_inconsistency(tree: MergeTree, cutoff: float, depth: int = 2) -> BinAssignment:
    """Flat clusters: maximal subtrees in which every merge has inconsistency < cutoff.

    Bins are numbered by the smallest leaf index they contain.
    """
    M = tree.n_leaves
    coef = inconsistency(tree, depth)
    ok = np.zeros(len(tree), dtype=bool)
    for i in range(len(tree)):  # children always precede parents
        l, r = tree.left[i], tree.right[i]
        ok[i] = (coef[i] < cutoff
                 and (l < M or ok[l - M])
                 and (r < M or ok[r - M]))
    clusters = []
    stack = [M + len(tree) - 1]
    while stack:
        v = stack.pop()
        if v < M or ok[v - M]:
            clusters.append(tree.leaves(v))
        else:
            stack.extend(tree.children(v))
    clusters.sort(key=min)
    mapping = np.empty(M, dtype=int)
    for b, members in enumerate(clusters):
        mapping[members] = b
    return BinAssignment(mapping, len(clusters))


def condense_codebook(codebook: Codebook, cutoff: float, depth: int = 2) -> BinAssignment:
    """Cluster each state's centroids separately; bins never mix states."""
    K = codebook.per_state_count
    parts = []
    offset = 0
    for rows in (slice(0, K), slice(K, 2 * K)):
        cents = codebook.centroids[rows]
        if cents.shape[0] == 1:
            a = BinAssignment(np.zeros(1, dtype=int), 1)
        else:
            a = cut_by_inconsistency(agglomerate(cents), cutoff, depth)
        parts.append(a.mapping + offset)
        offset += a.n_bins
    return BinAssignment(np.concatenate(parts), offset, codebook.state_of_centroid)


def condense_series(h: HistogramSeries, a: BinAssignment) -> HistogramSeries:
    """Sum source bins into their condensed bins, frame by frame."""
    if h.n_bins != a.n_centroids:
        raise InvalidInput(f"histograms have {h.n_bins} bins, assignment covers {a.n_centroids}")
    onehot = np.zeros((a.n_centroids, a.n_bins))
    onehot[np.arange(a.n_centroids), a.mapping] = 1.0
    return h.with_frames(h.frames @ onehot)
