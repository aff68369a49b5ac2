"""Recursive binary segmentation by squared-error minimization.

For a split at ``c`` (left segment ``x[:c]``), the two-segment squared error is

    MSE(c) = SS - G_c,   G_c = c * m1**2 + (n - c) * m2**2,

where ``SS`` is the total sum of squares about the interval mean and ``m1``,
``m2`` are the segment means after centring. Minimizing MSE is therefore
the same as maximizing ``G_c``. Treating ``G_c`` as Gamma(1, 2 sigma^2)
distributed gives the p-value ``exp(-G_c / (2 sigma^2))``, which is compared
to ``alpha / n`` (Bonferroni over the ``n`` candidate splits of the interval).

With the interval mean estimated from the data, ``G_c / sigma^2`` is in fact
chi-squared with one degree of freedom under the null, so this p-value is
conservative rather than exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import InvalidInput, InvalidParameter, SegmentTooShort
from ..series import (ChangePointSet, HistogramSeries, LabelSeries, ScoreSeries,
                      median_filter, threshold_labels)

__all__ = ["MseConfig", "split_profile", "best_split", "mse_split_stat", "mse_detect", "mse_multi_detect"]

MIN_SPLIT_LENGTH = 4


@dataclass(frozen=True)
class MseConfig:
    alpha: float = 0.1
    max_depth: int = 3
    min_segment: Optional[int] = None
    median_window: int = 30
    input_kind: str = "labels"

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise InvalidParameter(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.max_depth < 1:
            raise InvalidParameter("max_depth must be positive")
        if self.min_segment is not None and self.min_segment < 2:
            raise InvalidParameter("min_segment must be at least 2")
        if self.median_window < 1:
            raise InvalidParameter("median_window must be positive")
        if self.input_kind not in ("scores", "labels"):
            raise InvalidParameter(f"input_kind must be 'scores' or 'labels', got {self.input_kind!r}")

    @property
    def segment_floor(self) -> int:
        """Shortest segment a split may leave on either side.

        Defaults to the shortest run an interior point can keep after the
        median filter; anything shorter can only be an edge artifact.
        """
        if self.min_segment is not None:
            return self.min_segment
        return max(2, self.median_window // 2 + 1)


def _as_matrix(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[:, None] if x.ndim == 1 else x


def split_profile(x):
    """G_c for every split ``c = 1..n-1`` and the pooled sample variance.

    ``x`` may be 1-D or an (n, B) matrix; for matrices both quantities are
    summed over columns. Returns ``(G, var)`` with ``G[c - 1] = G_c``.
    """
    X = _as_matrix(x)
    n = X.shape[0]
    if n < 2:
        raise SegmentTooShort("need at least two samples to split")
    y = X - X.mean(axis=0)
    s1 = np.cumsum(y, axis=0)[:-1]  # left sums for c = 1..n-1
    c = np.arange(1, n)[:, None]
    G = (s1 ** 2 * n / (c * (n - c))).sum(axis=1)
    var = X.var(axis=0, ddof=1).sum()
    return G, float(var)


def _p_value(G, var):
    if var <= 0:
        return np.ones_like(np.asarray(G, dtype=float))
    return np.exp(-np.asarray(G) / (2.0 * var))


def mse_split_stat(s, c: int):
    """``(G_c, p_value)`` for splitting ``s`` before index ``c``."""
    x = np.asarray(getattr(s, "values", s), dtype=float)
    n = x.shape[0]
    if n < MIN_SPLIT_LENGTH:
        raise SegmentTooShort(f"series of length {n} is too short (need {MIN_SPLIT_LENGTH})")
    if not 1 <= c <= n - 1:
        raise InvalidInput(f"split index {c} outside 1..{n - 1}")
    G, var = split_profile(x)
    g = float(G[c - 1])
    return g, float(_p_value(g, var))


def best_split(X, min_segment: int = 1):
    """Split index maximizing G_c with both sides at least ``min_segment`` long.

    Returns ``(c, G_c, p_value)`` or ``None`` when no admissible split exists.
    The first maximum wins ties.
    """
    X = _as_matrix(X)
    n = X.shape[0]
    lo, hi = max(min_segment, 1), n - max(min_segment, 1)
    if n < MIN_SPLIT_LENGTH or lo > hi:
        return None
    G, var = split_profile(X)
    c = lo + int(np.argmax(G[lo - 1:hi]))
    return c, float(G[c - 1]), float(_p_value(G[c - 1], var))


def _segment(X: np.ndarray, alpha: float, max_depth: int, min_segment: int):
    """Recursive splitting; returns sorted (index, p_value) pairs."""
    found = []
    stack = [(0, X.shape[0], 1)]
    while stack:
        lo, hi, depth = stack.pop()
        n = hi - lo
        if depth > max_depth:
            continue
        split = best_split(X[lo:hi], min_segment)
        if split is None:
            continue
        c, _, p = split
        if p < alpha / n:
            c = lo + c
            found.append((c, p))
            stack.append((c, hi, depth + 1))
            stack.append((lo, c, depth + 1))
    found.sort()
    return found


def _to_set(found, series, detector):
    idx = [c for c, _ in found]
    meta = [p for _, p in found]
    return ChangePointSet.from_indices(idx, series, detector, meta)


def mse_detect(s, cfg: MseConfig = MseConfig()) -> ChangePointSet:
    """Median-filter the series, then split recursively while splits stay significant.

    With ``input_kind='labels'`` a ``ScoreSeries`` is first thresholded at 0.
    Each change-point is the first index of the right-hand segment; ``meta``
    holds the p-value of the accepted split.
    """
    if cfg.input_kind == "labels" and isinstance(s, ScoreSeries):
        s = threshold_labels(s)
    filtered = median_filter(s, cfg.median_window)
    found = _segment(_as_matrix(filtered.values), cfg.alpha, cfg.max_depth, cfg.segment_floor)
    return _to_set(found, s, "mse")


def mse_multi_detect(h: HistogramSeries, cfg: MseConfig = MseConfig()) -> ChangePointSet:
    """Multivariate version: per-bin squared errors and variances are summed."""
    filtered = median_filter(h, cfg.median_window)
    found = _segment(filtered.frames, cfg.alpha, cfg.max_depth, cfg.segment_floor)
    return _to_set(found, h, "mse-multi")
