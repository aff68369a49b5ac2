"""Two-state hidden Markov model with scalar Gaussian emissions.

States are ordered by emission mean: state 0 has the smaller mean
(negative state), state 1 the larger (positive state).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..bovw import kmeans_fit
from ..errors import InvalidInput, InvalidParameter
from ..series import ChangePointSet, ScoreSeries, savitzky_golay

__all__ = [
    "HmmParams",
    "log_emission",
    "forward_backward",
    "hmm_fit",
    "viterbi",
    "hmm_detect",
    "SIGMA_FLOOR",
]

SIGMA_FLOOR = 1e-3
_LOG_2PI = np.log(2 * np.pi)


@dataclass(frozen=True, eq=False)
class HmmParams:
    pi: np.ndarray
    A: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    loglik_history: tuple = field(default=())
    degenerate: bool = False

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float).reshape(2)
        A = np.asarray(self.A, dtype=float).reshape(2, 2)
        mu = np.asarray(self.mu, dtype=float).reshape(2)
        sigma = np.asarray(self.sigma, dtype=float).reshape(2)
        if np.any(pi < 0) or np.any(pi > 1) or not np.isclose(pi.sum(), 1.0):
            raise InvalidParameter("pi must be a probability vector")
        if np.any(A < 0) or np.any(A > 1) or not np.allclose(A.sum(axis=1), 1.0):
            raise InvalidParameter("rows of A must be probability vectors")
        if np.any(sigma <= 0):
            raise InvalidParameter("sigma must be positive")
        for name, val in (("pi", pi), ("A", A), ("mu", mu), ("sigma", sigma)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "loglik_history", tuple(float(v) for v in self.loglik_history))

    @property
    def loglik(self) -> float:
        return self.loglik_history[-1] if self.loglik_history else float("nan")

    def sorted_by_mean(self) -> "HmmParams":
        if self.mu[0] <= self.mu[1]:
            return self
        perm = [1, 0]
        return replace(self, pi=self.pi[perm], A=self.A[np.ix_(perm, perm)],
                       mu=self.mu[perm], sigma=self.sigma[perm])


def _values(s) -> np.ndarray:
    return np.asarray(getattr(s, "values", s), dtype=float)


def log_emission(x, mu, sigma) -> np.ndarray:
    """(n, 2) Gaussian log-densities."""
    x = np.asarray(x, dtype=float)[:, None]
    z = (x - mu[None, :]) / sigma[None, :]
    return -0.5 * (z ** 2 + _LOG_2PI) - np.log(sigma)[None, :]


def forward_backward(x, params: HmmParams):
    """Scaled forward-backward pass.

    Returns ``(gamma, xi_sum, loglik)``: per-step state posteriors (n, 2),
    expected transition counts summed over time (2, 2), and the sequence
    log-likelihood recovered from the scaling constants.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    logb = log_emission(x, params.mu, params.sigma)
    shift = logb.max(axis=1, keepdims=True)
    b = np.exp(logb - shift)
    A = params.A
    alpha = np.empty((n, 2))
    scale = np.empty(n)
    a = params.pi * b[0]
    scale[0] = a.sum()
    alpha[0] = a / scale[0]
    for t in range(1, n):
        a = (alpha[t - 1] @ A) * b[t]
        scale[t] = a.sum()
        alpha[t] = a / scale[t]
    beta = np.empty((n, 2))
    beta[-1] = 1.0
    for t in range(n - 2, -1, -1):
        beta[t] = (A @ (b[t + 1] * beta[t + 1])) / scale[t + 1]
    gamma = alpha * beta
    gamma /= gamma.sum(axis=1, keepdims=True)
    if n > 1:
        xi = (alpha[:-1, :, None] * A[None, :, :]
              * (b[1:] * beta[1:])[:, None, :] / scale[1:, None, None])
        xi_sum = xi.sum(axis=0)
    else:
        xi_sum = np.zeros((2, 2))
    loglik = float(np.log(scale).sum() + shift.sum())
    return gamma, xi_sum, loglik


def _init_params(xs, seed, sigma_floor):
    pooled = np.concatenate(xs)
    km = kmeans_fit(pooled[:, None], 2, seed=seed)
    centres = km.centroids[:, 0]
    order = np.argsort(centres, kind="stable")
    mu = centres[order]
    sigma = np.empty(2)
    for k, j in enumerate(order):
        members = pooled[km.labels == j]
        sd = members.std() if members.size > 1 else 0.0
        sigma[k] = max(sd, sigma_floor)
    A = np.array([[0.95, 0.05], [0.05, 0.95]])
    return HmmParams(np.array([0.5, 0.5]), A, mu, sigma)


def hmm_fit(s, seed: int = 0, max_iter: int = 200, tol: float = 1e-6,
            sigma_floor: float = SIGMA_FLOOR, init: HmmParams = None) -> HmmParams:
    """Baum-Welch estimation of (pi, A, mu, sigma).

    ``s`` is one series or a list of independent series (e.g. training
    folds); statistics are pooled across them. Starts from a 2-means split of
    the scores unless ``init`` is given. Stops once the log-likelihood gain
    falls below ``tol``. ``loglik_history[k]`` is the log-likelihood of the
    parameters after ``k`` M-steps; the returned parameters match its last
    entry. A constant input returns at once with ``degenerate=True``.
    """
    seqs = [s] if isinstance(s, (ScoreSeries, np.ndarray)) else list(s)
    xs = [_values(q) for q in seqs]
    if any(x.ndim != 1 for x in xs) or sum(x.size for x in xs) < 4:
        raise InvalidInput("need at least 4 scalar observations to fit an HMM")
    if max_iter < 1:
        raise InvalidParameter("max_iter must be positive")
    pooled = np.concatenate(xs)
    if np.ptp(pooled) == 0:
        mu = np.full(2, pooled[0])
        return HmmParams([0.5, 0.5], [[0.95, 0.05], [0.05, 0.95]], mu,
                         [sigma_floor, sigma_floor], degenerate=True)
    params = init if init is not None else _init_params(xs, seed, sigma_floor)
    history = []
    for _ in range(max_iter + 1):
        stats = [forward_backward(x, params) for x in xs]
        ll = sum(st[2] for st in stats)
        history.append(ll)
        if len(history) > 1 and history[-1] - history[-2] < tol:
            break
        if len(history) == max_iter + 1:
            break
        gammas = np.vstack([st[0] for st in stats])
        weight = gammas.sum(axis=0)
        pi = np.mean([st[0][0] for st in stats], axis=0)
        xi = sum(st[1] for st in stats)
        rows = xi.sum(axis=1, keepdims=True)
        A = np.where(rows > 0, xi / np.where(rows > 0, rows, 1.0), params.A)
        mu = params.mu.copy()
        sigma = params.sigma.copy()
        for k in range(2):
            if weight[k] > 1e-12:
                mu[k] = gammas[:, k] @ pooled / weight[k]
                var = gammas[:, k] @ (pooled - mu[k]) ** 2 / weight[k]
                sigma[k] = max(np.sqrt(var), sigma_floor)
        params = HmmParams(pi / pi.sum(), A, mu, sigma)
    return replace(params, loglik_history=tuple(history)).sorted_by_mean()


def viterbi(s, params: HmmParams) -> np.ndarray:
    """Most probable state path (log-space; lower state index wins exact ties)."""
    x = _values(s)
    n = x.size
    logb = log_emission(x, params.mu, params.sigma)
    with np.errstate(divide="ignore"):
        logA = np.log(params.A)
        delta = np.log(params.pi) + logb[0]
    back = np.zeros((n, 2), dtype=np.int8)
    for t in range(1, n):
        cand = delta[:, None] + logA  # cand[i, j]: from i to j
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], [0, 1]] + logb[t]
    path = np.empty(n, dtype=np.int8)
    path[-1] = int(np.argmax(delta))
    for t in range(n - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path


def hmm_detect(s: ScoreSeries, params: HmmParams, sg_window: int = 15,
               sg_order: int = 1) -> ChangePointSet:
    """Smooth, decode, and report the first index of every new state run."""
    smoothed = savitzky_golay(s, sg_window, sg_order)
    path = viterbi(smoothed, params)
    idx = np.flatnonzero(path[1:] != path[:-1]) + 1
    return ChangePointSet.from_indices(idx, s, "hmm", path[idx].astype(float))
