"""Change-point detectors over score, label and histogram series."""

from .filters import round_filter, sign_change_filter
from .forecast import ForecastConfig, forecast_detect
from .histogram import (MultiConfig, chi2_stat, hist_detect, hist_scan, match_distance,
                        match_threshold)
from .hmm import HmmParams, forward_backward, hmm_detect, hmm_fit, viterbi
from .mle import MleConfig, mle_detect, mle_segment
from .mse import MseConfig, mse_detect, mse_multi_detect, mse_split_stat

UNIVARIATE = ("mse", "forecast-ar1", "forecast-mean", "mle", "hmm")
MULTIVARIATE = ("chi2", "match", "mse-multi")
DETECTORS = UNIVARIATE + MULTIVARIATE

__all__ = [
    "DETECTORS", "UNIVARIATE", "MULTIVARIATE",
    "MseConfig", "mse_split_stat", "mse_detect", "mse_multi_detect",
    "ForecastConfig", "forecast_detect", "sign_change_filter", "round_filter",
    "MleConfig", "mle_detect", "mle_segment",
    "HmmParams", "forward_backward", "hmm_fit", "viterbi", "hmm_detect",
    "MultiConfig", "chi2_stat", "match_distance", "match_threshold", "hist_scan", "hist_detect",
]
