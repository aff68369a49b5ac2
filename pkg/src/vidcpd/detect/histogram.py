"""Histogram-sequence detectors: chi-squared goodness of fit and match distance,
each run with the future-window rule against a single baseline frame."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaincc

from ..errors import InvalidInput, InvalidParameter
from ..series import ChangePointSet, HistogramSeries
from .filters import round_filter
from .mse import MseConfig, mse_multi_detect

__all__ = [
    "MultiConfig",
    "chi2_stat",
    "chi2_sf",
    "match_distance",
    "match_threshold",
    "hist_scan",
    "hist_detect",
]

EMPTY_EXPECTED = 0.5


@dataclass(frozen=True)
class MultiConfig:
    """``param`` is alpha for ``chi2`` and the threshold multiplier for ``match``."""

    method: str = "chi2"
    param: float = 0.001
    future_window: int = 7
    round_granularity: Optional[float] = None

    def __post_init__(self):
        if self.method not in ("chi2", "match", "mse"):
            raise InvalidParameter(f"unknown method {self.method!r}")
        if self.method == "chi2" and not 0 < self.param < 1:
            raise InvalidParameter("chi2 alpha must lie in (0, 1)")
        if self.method == "match" and not self.param > 0:
            raise InvalidParameter("match constant must be positive")
        if self.future_window < 1:
            raise InvalidParameter("future_window must be positive")
        if self.round_granularity is not None and not self.round_granularity > 0:
            raise InvalidParameter("round_granularity must be positive")


def chi2_sf(stat: float, df: int) -> float:
    """Upper tail of the chi-squared distribution (regularized incomplete gamma)."""
    if df < 1:
        return 1.0 if stat <= 0 else 0.0
    return float(gammaincc(df / 2.0, stat / 2.0))


def chi2_stat(observed, expected):
    """Chi-squared goodness of fit of ``observed`` counts against ``expected``.

    Bins empty in both histograms are dropped; an expected count of zero
    where something was observed is replaced by 0.5. Degrees of freedom are
    the participating bins minus one. Returns ``(stat, p_value)``.
    """
    o = np.asarray(observed, dtype=float)
    e = np.asarray(expected, dtype=float)
    if o.shape != e.shape:
        raise InvalidInput("histograms differ in bin count")
    used = ~((o == 0) & (e == 0))
    o, e = o[used], e[used]
    e = np.where(e == 0, EMPTY_EXPECTED, e)
    stat = float(np.sum((o - e) ** 2 / e))
    return stat, chi2_sf(stat, o.size - 1)


def match_distance(h, k) -> float:
    """L1 distance between cumulative sums of two histograms (raw counts)."""
    h = np.asarray(h, dtype=float)
    k = np.asarray(k, dtype=float)
    if h.shape != k.shape:
        raise InvalidInput("histograms differ in bin count")
    return float(np.abs(np.cumsum(h) - np.cumsum(k)).sum())


def match_threshold(h: HistogramSeries, constant: float) -> float:
    """``constant`` times the summed per-bin mean absolute successive difference."""
    if len(h) < 2:
        return 0.0
    return float(constant * np.abs(np.diff(h.frames, axis=0)).mean(axis=0).sum())


def hist_scan(h: HistogramSeries, cfg: MultiConfig):
    """Run the future-window rule; returns ``(indices, stats, baselines)``.

    ``baselines[k]`` is the frame index serving as baseline when window start
    ``k + 1`` was tested. ``stats`` holds, per change-point, the largest
    p-value (chi2) or smallest distance (match) inside its window.
    """
    n, W = len(h), cfg.future_window
    if n <= W + 1:
        raise InvalidInput(f"series of length {n} too short for future window {W}")
    F = h.frames
    if cfg.method == "match":
        threshold = match_threshold(h, cfg.param)
    base = 0
    found, stats, baselines = [], [], []
    for t in range(1, n - W + 1):
        baselines.append(base)
        window = F[t:t + W]
        if cfg.method == "chi2":
            p = np.array([chi2_stat(f, F[base])[1] for f in window])
            fire, stat = bool(np.all(p < cfg.param)), float(p.max())
        else:
            d = np.array([match_distance(F[base], f) for f in window])
            fire, stat = bool(np.all(d > threshold)), float(d.min())
        if fire:
            found.append(t)
            stats.append(stat)
            base = t
    return found, stats, baselines


def hist_detect(h: HistogramSeries, cfg: MultiConfig = MultiConfig(),
                mse_cfg: MseConfig = MseConfig()) -> ChangePointSet:
    """Histogram change-points; ``method='mse'`` delegates to the multivariate MSE."""
    if cfg.method == "mse":
        cps = mse_multi_detect(h, mse_cfg)
    else:
        found, stats, _ = hist_scan(h, cfg)
        cps = ChangePointSet.from_indices(found, h, cfg.method, stats)
    if cfg.round_granularity is not None:
        cps = round_filter(cps, cfg.round_granularity)
    return cps
