"""Maximum-likelihood relabelling of noisy binary labels under a switch budget.

Given labels ``x`` from a classifier of accuracy ``p``, find true labels ``L``
maximizing

    log(p) * #{x_i == L_i} + log(1 - p) * #{x_i != L_i}

subject to fewer than ``M`` switches ``L_i != L_{i+1}``. Solved exactly by
dynamic programming over (position, label, switches used).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParameter
from ..series import ChangePointSet, LabelSeries, ScoreSeries, threshold_labels

__all__ = ["MleConfig", "label_loglik", "mle_segment", "mle_detect"]


@dataclass(frozen=True)
class MleConfig:
    p: float = 0.9
    M: int = 10

    def __post_init__(self):
        if not 0.5 < self.p < 1:
            raise InvalidParameter(f"p must lie strictly between 0.5 and 1, got {self.p}")
        if int(self.M) != self.M or self.M < 1:
            raise InvalidParameter(f"M must be a positive integer (fewer than M switches), got {self.M}")


def label_loglik(x, L, p: float) -> float:
    x, L = np.asarray(x), np.asarray(L)
    agree = int(np.sum(x == L))
    return agree * np.log(p) + (x.size - agree) * np.log1p(-p)


def mle_segment(x, p: float, M: int):
    """Optimal labels and their log-likelihood.

    Ties prefer no switch at each step, then final label 0, then fewer
    switches overall.
    """
    x = np.asarray(x, dtype=int)
    n = x.size
    S = int(M)  # switches allowed: 0..M-1
    hit, miss = np.log(p), np.log1p(-p)
    emit = np.where(x[:, None] == np.array([0, 1])[None, :], hit, miss)  # (n, 2)
    score = np.full((2, S), -np.inf)
    score[:, 0] = emit[0]
    # back[i, l, s]: True when position i-1 had the other label
    back = np.zeros((n, 2, S), dtype=bool)
    for i in range(1, n):
        new = np.full((2, S), -np.inf)
        for l in (0, 1):
            stay = score[l]
            switch = np.concatenate([[-np.inf], score[1 - l, :-1]])
            take_switch = switch > stay
            back[i, l] = take_switch
            new[l] = np.where(take_switch, switch, stay) + emit[i, l]
        score = new
    best, best_l, best_s = -np.inf, 0, 0
    for l in (0, 1):
        for s_ in range(S):
            if score[l, s_] > best:
                best, best_l, best_s = score[l, s_], l, s_
    L = np.empty(n, dtype=np.int8)
    l, s_ = best_l, best_s
    for i in range(n - 1, -1, -1):
        L[i] = l
        if i > 0 and back[i, l, s_]:
            l, s_ = 1 - l, s_ - 1
    return L, float(best)


def mle_detect(l, cfg: MleConfig = MleConfig()):
    """Returns ``(labels, change_points)``; change-points are first indices of new labels.

    A ``ScoreSeries`` input is thresholded at 0. ``meta`` of the change-point
    set carries the optimal log-likelihood on every point.
    """
    if isinstance(l, ScoreSeries):
        l = threshold_labels(l)
    labels, ll = mle_segment(l.labels, cfg.p, cfg.M)
    idx = np.flatnonzero(labels[1:] != labels[:-1]) + 1
    cps = ChangePointSet.from_indices(idx, l, "mle", np.full(idx.size, ll))
    return labels, cps
