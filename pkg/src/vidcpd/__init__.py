"""Change-point detection for two-state classifier score series and BoVW histogram series."""

__version__ = "0.1.0"

from .errors import CPDError, DataError, InvalidInput, InvalidParameter, SegmentTooShort
from .series import (ChangePointSet, HistogramSeries, LabelSeries, ScoreSeries, median_filter,
                     savitzky_golay, threshold_labels, time_of_index)
from .evaluation import EvalReport, aggregate, evaluate

__all__ = [
    "__version__",
    "CPDError", "DataError", "InvalidInput", "InvalidParameter", "SegmentTooShort",
    "ScoreSeries", "LabelSeries", "HistogramSeries", "ChangePointSet",
    "median_filter", "savitzky_golay", "threshold_labels", "time_of_index",
    "EvalReport", "evaluate", "aggregate",
]
