"""Future-window forecasting detectors (mean model and one-lag autoregression)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInput, InvalidParameter
from ..series import ChangePointSet
from .filters import round_filter, sign_change_filter

__all__ = ["ForecastConfig", "fit_mean", "fit_ar1", "forecast_detect"]


@dataclass(frozen=True)
class ForecastConfig:
    """``filters`` entries are ``"sign_change"`` or ``("round", granularity_seconds)``."""

    model: str = "ar1"
    future_window: int = 5
    baseline_count: int = 5
    threshold_mode: str = "series_stddev"
    filters: tuple = ("sign_change",)

    def __post_init__(self):
        if self.model not in ("ar1", "mean"):
            raise InvalidParameter(f"unknown forecast model {self.model!r}")
        if self.future_window < 1:
            raise InvalidParameter("future_window must be positive")
        if self.baseline_count < (2 if self.model == "ar1" else 1):
            raise InvalidParameter("baseline_count too small for the model")
        if self.threshold_mode != "series_stddev":
            raise InvalidParameter(f"unknown threshold_mode {self.threshold_mode!r}")
        for f in self.filters:
            if f == "sign_change":
                continue
            if isinstance(f, (tuple, list)) and len(f) == 2 and f[0] == "round" and f[1] > 0:
                continue
            raise InvalidParameter(f"unknown filter {f!r}")


def fit_mean(x: np.ndarray):
    """Mean model: returns a predictor ignoring the previous observation."""
    mu = float(np.mean(x))
    return lambda prev: mu


def fit_ar1(x: np.ndarray):
    """Least-squares fit of ``x[t] = a + b * x[t-1]``.

    With a constant lagged regressor the slope is unidentifiable, so the
    model falls back to the mean of the targets.
    """
    x = np.asarray(x, dtype=float)
    prev, nxt = x[:-1], x[1:]
    if prev.size == 0 or np.ptp(prev) == 0:
        mu = float(np.mean(nxt if nxt.size else x))
        return lambda p: mu
    b, a = np.polyfit(prev, nxt, 1)
    return lambda p: float(a + b * p)


def forecast_detect(s, cfg: ForecastConfig = ForecastConfig()) -> ChangePointSet:
    """Flag a change when every value in the future window misses the forecast.

    The baseline model is fit on the first ``baseline_count`` points. For each
    later start ``t`` (while a full window still fits), one prediction for
    ``x[t]`` is compared against all of ``x[t:t+W]``; if every absolute
    difference exceeds the series standard deviation, ``t`` is a change-point
    and the model is refit on that window. Post-filters run in config order.
    """
    x = np.asarray(s.values, dtype=float)
    n, W, b = x.size, cfg.future_window, cfg.baseline_count
    if n <= b + W:
        raise InvalidInput(f"series of length {n} too short for baseline {b} + window {W}")
    fit = fit_ar1 if cfg.model == "ar1" else fit_mean
    threshold = float(np.std(x, ddof=1))
    model = fit(x[:b])
    found, margin = [], []
    for t in range(b, n - W + 1):
        pred = model(x[t - 1])
        gap = np.abs(x[t:t + W] - pred)
        if np.all(gap > threshold):
            found.append(t)
            margin.append(float(gap.min()))
            model = fit(x[t:t + W])
    detector = "forecast-" + cfg.model
    cps = ChangePointSet.from_indices(found, s, detector, margin)
    for f in cfg.filters:
        if f == "sign_change":
            cps = sign_change_filter(s, cps)
        else:
            cps = round_filter(cps, f[1])
    return cps
