"""Published detector settings and ``key = value`` config handling.

Two profiles mirror the two score sources: ``cnn`` (one frame per second)
and ``svm`` (every tenth frame of 30 fps video). In the ``svm`` profile the
rounding filter snaps to 30 frames, i.e. one second.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .detect.forecast import ForecastConfig
from .detect.histogram import MultiConfig
from .detect.mle import MleConfig
from .detect.mse import MseConfig
from .errors import InvalidParameter

__all__ = ["HmmConfig", "PROFILES", "default_config", "read_config_file", "apply_overrides",
           "config_to_dict", "config_from_dict"]


@dataclass(frozen=True)
class HmmConfig:
    sg_window: int = 15
    sg_order: int = 1
    max_iter: int = 200
    tol: float = 1e-6

    def __post_init__(self):
        if self.sg_window < 1 or self.sg_window % 2 == 0:
            raise InvalidParameter("sg_window must be odd and positive")
        if not 0 <= self.sg_order < self.sg_window:
            raise InvalidParameter("sg_order must satisfy 0 <= order < window")


_CNN = {
    "mse": MseConfig(alpha=0.1, max_depth=3, median_window=30, input_kind="labels"),
    "forecast-ar1": ForecastConfig(model="ar1", future_window=5, baseline_count=5,
                                   filters=("sign_change",)),
    "forecast-mean": ForecastConfig(model="mean", future_window=5, baseline_count=5,
                                    filters=("sign_change",)),
    "mle": MleConfig(p=0.9, M=10),
    "hmm": HmmConfig(sg_window=15, sg_order=1),
    "chi2": MultiConfig(method="chi2", param=0.001, future_window=7),
    "match": MultiConfig(method="match", param=20.0, future_window=10, round_granularity=1.0),
    "mse-multi": MseConfig(alpha=0.1, max_depth=3, median_window=30, input_kind="scores"),
}

_SVM = dict(_CNN)
_SVM.update({
    "mse": MseConfig(alpha=0.1, max_depth=3, median_window=30, input_kind="scores"),
    "forecast-ar1": ForecastConfig(model="ar1", future_window=5, baseline_count=5, filters=()),
    "forecast-mean": ForecastConfig(model="mean", future_window=7, baseline_count=10,
                                    filters=(("round", 1.0),)),
})

PROFILES = {"cnn": _CNN, "svm": _SVM}

# friendlier names for MultiConfig.param
_ALIASES = {"chi2": {"alpha": "param"}, "match": {"constant": "param"}}


def default_config(method: str, profile: str = "cnn"):
    try:
        return PROFILES[profile][method]
    except KeyError:
        raise InvalidParameter(f"no defaults for method {method!r} in profile {profile!r}") from None


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidParameter(f"{path}:{lineno}: expected 'key = value'")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def _parse_filters(text: str) -> tuple:
    out = []
    for tok in filter(None, (t.strip() for t in text.split(","))):
        if tok in ("sign_change", "sign-change"):
            out.append("sign_change")
        elif tok.startswith("round:"):
            out.append(("round", float(tok.split(":", 1)[1])))
        elif tok != "none":
            raise InvalidParameter(f"unknown filter {tok!r}")
    return tuple(out)


def _coerce(value, current, key):
    if not isinstance(value, str):
        return value
    if key == "filters":
        return _parse_filters(value)
    if value.lower() in ("none", "null"):
        return None
    if isinstance(current, bool):
        return value.lower() in ("1", "true", "yes")
    if isinstance(current, int) or key in ("min_segment", "max_depth", "M", "future_window",
                                           "baseline_count", "median_window", "sg_window",
                                           "sg_order", "max_iter"):
        try:
            return int(value)
        except ValueError:
            raise InvalidParameter(f"{key} expects an integer, got {value!r}") from None
    if isinstance(current, float) or key in ("round_granularity", "alpha", "param", "p", "tol"):
        try:
            return float(value)
        except ValueError:
            raise InvalidParameter(f"{key} expects a number, got {value!r}") from None
    return value


def apply_overrides(cfg, method: str, overrides: dict):
    """Return ``cfg`` with string ``overrides`` coerced onto its fields."""
    names = {f.name for f in dataclasses.fields(cfg)}
    aliases = _ALIASES.get(method, {})
    changes = {}
    for key, value in overrides.items():
        field = aliases.get(key, key)
        if field not in names:
            raise InvalidParameter(f"{method} has no setting {key!r}")
        changes[field] = _coerce(value, getattr(cfg, field), field)
    return dataclasses.replace(cfg, **changes) if changes else cfg


def config_to_dict(cfg) -> dict:
    d = {}
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = [list(x) if isinstance(x, tuple) else x for x in v]
        if isinstance(v, float) and math.isinf(v):
            v = "inf"
        d[f.name] = v
    return d


def config_from_dict(method: str, d: dict):
    base = default_config(method)
    kwargs = dict(d)
    if "filters" in kwargs:
        kwargs["filters"] = tuple(tuple(x) if isinstance(x, list) else x for x in kwargs["filters"])
    return dataclasses.replace(base, **kwargs)
