"""Post-filters applied to univariate detector output."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidParameter
from ..series import ChangePointSet, index_of_time

__all__ = ["sign_change_filter", "round_filter"]


def sign_change_filter(s, cps: ChangePointSet) -> ChangePointSet:
    """Keep only change-points where the mean score changes sign.

    The series is cut at every change-point; a point survives when the
    segment means on either side of it have different signs (0 counts as
    positive).
    """
    if len(cps) == 0:
        return cps
    x = np.asarray(s.values, dtype=float)
    idx = np.array([index_of_time(s, t) for t in cps.times])
    bounds = np.concatenate([[0], idx, [x.size]])
    signs = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        seg = x[lo:hi]
        signs.append(seg.mean() >= 0 if seg.size else None)
    keep = np.array([signs[k] is not None and signs[k + 1] is not None
                     and signs[k] != signs[k + 1] for k in range(len(idx))])
    meta = cps.meta[keep] if cps.meta is not None else None
    return ChangePointSet(cps.times[keep], cps.detector, meta)


def round_filter(cps: ChangePointSet, granularity: float) -> ChangePointSet:
    """Round times to the nearest multiple of ``granularity`` (halves up), merging duplicates."""
    if not granularity > 0:
        raise InvalidParameter(f"granularity must be positive, got {granularity}")
    rounded = np.floor(cps.times / granularity + 0.5) * granularity
    return ChangePointSet.from_unsorted(rounded, cps.detector, cps.meta)
