"""Synthetic stand-in for the body-worn-video benchmark.

Every univariate detector runs with its published settings on a seeded
corpus from :func:`vidcpd.synthetic.benchmark_corpus`. The HMM is trained
by k-fold cross-fitting: each fold is decoded with parameters fit on the
remaining folds, so no video is scored by a model that saw it.
"""

from __future__ import annotations

from typing import Dict, Sequence

import numpy as np

from .config import default_config
from .detect import forecast_detect, hmm_detect, hmm_fit, mle_detect, mse_detect
from .evaluation import EvalReport, aggregate, evaluate
from .synthetic import SyntheticVideo, benchmark_corpus

__all__ = ["BENCHMARK_SEED", "crossfit_hmm", "run_detectors", "run_benchmark"]

BENCHMARK_SEED = 2016


def crossfit_hmm(videos: Sequence[SyntheticVideo], folds: int = 5, seed: int = 0,
                 profile: str = "cnn") -> dict:
    """HMM change-points per video id, each fold decoded by a model fit on the others."""
    cfg = default_config("hmm", profile)
    ids = np.arange(len(videos))
    out = {}
    for k, test in enumerate(np.array_split(ids, folds)):
        train = [videos[i].scores for i in ids if i not in set(test)]
        params = hmm_fit(train, seed=seed + k, max_iter=cfg.max_iter, tol=cfg.tol)
        for i in test:
            v = videos[i]
            out[v.video_id] = hmm_detect(v.scores, params, cfg.sg_window, cfg.sg_order)
    return out


def run_detectors(videos: Sequence[SyntheticVideo], profile: str = "cnn", folds: int = 5,
                  hmm_seed: int = 0) -> Dict[str, dict]:
    """Change-point sets keyed by detector id, then by video id."""
    runners = {
        "mse": lambda v: mse_detect(v.scores, default_config("mse", profile)),
        "forecast-ar1": lambda v: forecast_detect(v.scores, default_config("forecast-ar1", profile)),
        "forecast-mean": lambda v: forecast_detect(v.scores, default_config("forecast-mean", profile)),
        "mle": lambda v: mle_detect(v.labels, default_config("mle", profile))[1],
    }
    found = {name: {v.video_id: fn(v) for v in videos} for name, fn in runners.items()}
    found["hmm"] = crossfit_hmm(videos, folds, hmm_seed, profile)
    return found


def run_benchmark(seed: int = BENCHMARK_SEED, n_videos: int = 100, folds: int = 5,
                    window: float = 10.0, **corpus_kw) -> Dict[str, EvalReport]:
    """Aggregate report per detector on a freshly generated corpus."""
    videos = benchmark_corpus(n_videos, seed=seed, **corpus_kw)
    found = run_detectors(videos, folds=folds)
    return {name: aggregate(evaluate(sets[v.video_id], v.truth, window) for v in videos)
            for name, sets in found.items()}
