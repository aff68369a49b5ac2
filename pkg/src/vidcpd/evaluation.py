"""Windowed precision/recall for change-point detections.

A true change-point counts as found when any prediction lies within
``window`` seconds of it (inclusive), and a prediction counts as correct
when any true change-point lies within ``window`` of it. There is no
one-to-one matching. Totals are summed over videos before dividing.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidInput, InvalidParameter

__all__ = ["VideoCounts", "EvalReport", "evaluate", "aggregate"]

DEFAULT_WINDOW = 10.0


@dataclass(frozen=True)
class VideoCounts:
    true_total: int
    predicted_total: int
    true_matched: int
    predicted_matched: int
    window: float = DEFAULT_WINDOW


@dataclass(frozen=True)
class EvalReport:
    true_total: int
    predicted_total: int
    true_matched: int
    predicted_matched: int
    recall: float
    precision: float
    window: float

    def as_dict(self) -> dict:
        return asdict(self)


def _times(cps) -> np.ndarray:
    return np.asarray(getattr(cps, "times", cps), dtype=float).reshape(-1)


def evaluate(predicted, truth, window: float = DEFAULT_WINDOW) -> VideoCounts:
    """Match one video's predictions against its ground truth."""
    if window < 0:
        raise InvalidParameter("window must be nonnegative")
    p, t = _times(predicted), _times(truth)
    if p.size == 0 or t.size == 0:
        return VideoCounts(t.size, p.size, 0, 0, float(window))
    close = np.abs(t[:, None] - p[None, :]) <= window
    return VideoCounts(t.size, p.size, int(close.any(axis=1).sum()),
                       int(close.any(axis=0).sum()), float(window))


def aggregate(counts: Iterable[VideoCounts]) -> EvalReport:
    """Pool counts over videos; empty denominators give a ratio of 1."""
    counts = list(counts)
    if not counts:
        raise InvalidInput("nothing to aggregate")
    windows = {c.window for c in counts}
    if len(windows) > 1:
        raise InvalidInput("videos were evaluated with different windows")
    tt = sum(c.true_total for c in counts)
    pt = sum(c.predicted_total for c in counts)
    tm = sum(c.true_matched for c in counts)
    pm = sum(c.predicted_matched for c in counts)
    recall = tm / tt if tt else 1.0
    precision = pm / pt if pt else 1.0
    return EvalReport(tt, pt, tm, pm, recall, precision, windows.pop())
