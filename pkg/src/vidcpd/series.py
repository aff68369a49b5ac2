"""Regularly sampled series containers and the smoothing filters.

Every series carries a ``sample_period`` (seconds between entries) and an
``origin`` (time of entry 0), so detectors can report change-points in
seconds regardless of how densely frames were sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.signal import savgol_coeffs

from .errors import InvalidInput, InvalidParameter

__all__ = [
    "ScoreSeries",
    "LabelSeries",
    "HistogramSeries",
    "ChangePointSet",
    "median_filter",
    "savitzky_golay",
    "time_of_index",
    "index_of_time",
    "threshold_labels",
]


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_timing(sample_period, origin):
    if not np.isfinite(sample_period) or sample_period <= 0:
        raise InvalidParameter(f"sample_period must be > 0, got {sample_period}")
    if not np.isfinite(origin) or origin < 0:
        raise InvalidParameter(f"origin must be >= 0, got {origin}")


@dataclass(frozen=True, eq=False)
class ScoreSeries:
    """Univariate classifier scores sampled every ``sample_period`` seconds."""

    values: np.ndarray
    sample_period: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1 or values.size == 0:
            raise InvalidInput("score series must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(values)):
            raise InvalidInput("score series contains non-finite values")
        _check_timing(self.sample_period, self.origin)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sample_period", float(self.sample_period))
        object.__setattr__(self, "origin", float(self.origin))

    def __len__(self):
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.origin + np.arange(len(self)) * self.sample_period

    def with_values(self, values) -> "ScoreSeries":
        return ScoreSeries(values, self.sample_period, self.origin)


@dataclass(frozen=True, eq=False)
class LabelSeries:
    """Binary classifier labels (0 = negative state, 1 = positive state)."""

    labels: np.ndarray
    sample_period: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        raw = np.asarray(self.labels)
        if raw.ndim != 1 or raw.size == 0:
            raise InvalidInput("label series must be a nonempty 1-D sequence")
        if not np.all((raw == 0) | (raw == 1)):
            raise InvalidInput("labels must be exactly 0 or 1")
        _check_timing(self.sample_period, self.origin)
        object.__setattr__(self, "labels", _frozen(raw, dtype=np.int8))
        object.__setattr__(self, "sample_period", float(self.sample_period))
        object.__setattr__(self, "origin", float(self.origin))

    def __len__(self):
        return self.labels.size

    @property
    def values(self) -> np.ndarray:
        """Labels as floats, so label series can feed score-based code paths."""
        return self.labels.astype(float)

    def as_scores(self) -> ScoreSeries:
        return ScoreSeries(self.values, self.sample_period, self.origin)


@dataclass(frozen=True, eq=False)
class HistogramSeries:
    """A sequence of nonnegative fixed-length histograms, one per frame."""

    frames: np.ndarray
    sample_period: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        frames = _frozen(self.frames)
        if frames.ndim != 2 or frames.shape[0] == 0 or frames.shape[1] == 0:
            raise InvalidInput("histogram series must be a nonempty (n, B) array")
        if not np.all(np.isfinite(frames)) or np.any(frames < 0):
            raise InvalidInput("histogram bins must be finite and nonnegative")
        _check_timing(self.sample_period, self.origin)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "sample_period", float(self.sample_period))
        object.__setattr__(self, "origin", float(self.origin))

    def __len__(self):
        return self.frames.shape[0]

    @property
    def n_bins(self) -> int:
        return self.frames.shape[1]

    def with_frames(self, frames) -> "HistogramSeries":
        return HistogramSeries(frames, self.sample_period, self.origin)


@dataclass(frozen=True, eq=False)
class ChangePointSet:
    """Sorted change-point times in seconds, tagged with the detector id.

    ``meta`` optionally holds one diagnostic per point (a p-value, a distance,
    ...), aligned with ``times``.
    """

    times: np.ndarray
    detector: str = ""
    meta: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        if times.size and np.any(np.diff(times) <= 0):
            raise InvalidInput("change-point times must be strictly increasing")
        object.__setattr__(self, "times", _frozen(times))
        if self.meta is not None:
            meta = _frozen(np.asarray(self.meta, dtype=float).reshape(-1))
            if meta.size != times.size:
                raise InvalidInput("meta must align with times")
            object.__setattr__(self, "meta", meta)

    def __len__(self):
        return self.times.size

    def __iter__(self):
        return iter(self.times.tolist())

    @classmethod
    def from_unsorted(cls, times, detector="", meta=None) -> "ChangePointSet":
        """Sort and deduplicate ``times``; the first meta value of a duplicate wins."""
        times = np.asarray(times, dtype=float).reshape(-1)
        uniq, first = np.unique(times, return_index=True)
        if meta is not None:
            meta = np.asarray(meta, dtype=float).reshape(-1)[first]
        return cls(uniq, detector, meta)

    @classmethod
    def from_indices(cls, indices, series, detector="", meta=None) -> "ChangePointSet":
        indices = np.asarray(indices, dtype=int).reshape(-1)
        if indices.size and (indices.min() < 0 or indices.max() >= len(series)):
            raise InvalidInput("change-point index outside the series")
        times = series.origin + indices * series.sample_period
        return cls.from_unsorted(times, detector, meta)


def time_of_index(s, i: int) -> float:
    """Time in seconds of entry ``i`` of any series container."""
    n = len(s)
    if not 0 <= i < n:
        raise IndexError(f"index {i} outside series of length {n}")
    return s.origin + i * s.sample_period


def index_of_time(s, t: float) -> int:
    """Nearest entry index to time ``t``, clipped to the series."""
    i = int(np.floor((t - s.origin) / s.sample_period + 0.5))
    return min(max(i, 0), len(s) - 1)


def threshold_labels(s: ScoreSeries, threshold: float = 0.0) -> LabelSeries:
    """Binary labels from scores: 1 where the score is at least ``threshold``."""
    return LabelSeries((s.values >= threshold).astype(np.int8), s.sample_period, s.origin)


def _half_widths(n: int, half: int) -> np.ndarray:
    # symmetric shrinkage: never reach past either end
    idx = np.arange(n)
    return np.minimum(np.minimum(idx, n - 1 - idx), half)


def _median_1d(x: np.ndarray, half: int) -> np.ndarray:
    n = x.size
    out = np.empty(n)
    hw = _half_widths(n, half)
    interior = hw == half
    if half > 0 and np.any(interior):
        win = np.lib.stride_tricks.sliding_window_view(x, 2 * half + 1)
        out[half:n - half] = np.median(win, axis=1)
    for i in np.flatnonzero(~interior):
        h = hw[i]
        out[i] = np.median(x[i - h:i + h + 1])
    if half == 0:
        out[:] = x
    return out


def median_filter(s, window: int):
    """Centered running median with symmetric window shrinkage at the edges.

    Interior points use ``2 * (window // 2) + 1`` samples, so an even window
    is widened by one to keep the median centered. Near the ends the window
    shrinks symmetrically; the first and last entries pass through.

    Works on ``ScoreSeries``, ``LabelSeries`` (returns scores, since the
    median of an even count can be 0.5) and ``HistogramSeries`` (per bin).
    """
    if int(window) != window or window < 1:
        raise InvalidParameter(f"median window must be a positive integer, got {window}")
    half = int(window) // 2
    if isinstance(s, HistogramSeries):
        cols = [_median_1d(s.frames[:, b], half) for b in range(s.n_bins)]
        return s.with_frames(np.column_stack(cols))
    out = _median_1d(np.asarray(s.values, dtype=float), half)
    return ScoreSeries(out, s.sample_period, s.origin)


def savitzky_golay(s: ScoreSeries, window: int = 15, order: int = 1) -> ScoreSeries:
    """Savitzky-Golay smoothing with symmetric window shrinkage at the edges.

    Each output value is the centre of a least-squares polynomial of degree
    ``order`` fitted to the centred window. Where the window has to shrink to
    ``2h + 1`` points, the degree is capped at ``2h`` (an exact interpolant).
    """
    if int(window) != window or window < 1 or window % 2 == 0:
        raise InvalidParameter(f"Savitzky-Golay window must be odd and positive, got {window}")
    if int(order) != order or order < 0 or order >= window:
        raise InvalidParameter(f"polynomial order must satisfy 0 <= order < window, got {order}")
    x = np.asarray(s.values, dtype=float)
    n = x.size
    half = window // 2
    hw = _half_widths(n, half)
    out = np.empty(n)
    for h in np.unique(hw):
        h = int(h)
        rows = np.flatnonzero(hw == h)
        if h == 0:
            out[rows] = x[rows]
            continue
        coeffs = savgol_coeffs(2 * h + 1, min(order, 2 * h), use="dot")
        offsets = np.arange(-h, h + 1)
        out[rows] = x[rows[:, None] + offsets[None, :]] @ coeffs
    return ScoreSeries(out, s.sample_period, s.origin)
