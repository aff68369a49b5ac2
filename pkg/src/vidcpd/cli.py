"""Batch command-line front end.

Every command first turns its arguments into a run manifest (a JSON dict
holding resolved paths, the full detector configuration and the seed) and
then executes purely from that manifest. ``replay`` feeds a saved manifest
back through the same executor, which is what makes re-runs byte-identical.

Exit codes: 0 success, 2 usage error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import io as vio
from .bovw import DescriptorSet, build_codebook, build_pyramid, hard_vq, soft_vq
from .condense import agglomerate, condense_codebook, condense_series, cut_by_inconsistency
from .config import (apply_overrides, config_from_dict, config_to_dict, default_config,
                     read_config_file)
from .detect import (MULTIVARIATE, UNIVARIATE, forecast_detect, hist_detect, hmm_detect,
                     hmm_fit, mle_detect, mse_detect, mse_multi_detect)
from .errors import CPDError, DataError, InvalidParameter
from .evaluation import aggregate, evaluate
from .series import ChangePointSet, HistogramSeries
from .synthetic import (RNG_NAME, SynthSpec, gen_histograms, gen_labels, gen_scores, gen_states,
                        benchmark_corpus)

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3


class UsageError(Exception):
    pass


def video_id(path) -> str:
    """``runs/video007.scores.csv`` -> ``video007``."""
    return Path(path).name.split(".", 1)[0]


def _abs(paths):
    return [str(Path(p).resolve()) for p in paths]


def _float_arg(text):
    return float(text)  # accepts "inf"


def manifest_path(output: str, command: str) -> Path:
    out = Path(output)
    if command in ("vq", "condense", "synth"):
        return out / "manifest.json"
    return out.with_name(out.name + ".manifest.json")


def _dump(manifest) -> str:
    return json.dumps(manifest, indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------- detect

def _resolve_config(args):
    cfg = default_config(args.method, args.profile)
    overrides = {}
    if args.config:
        overrides.update(read_config_file(args.config))
    for item in args.set or ():
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    return apply_overrides(cfg, args.method, overrides)


def manifest_detect(args) -> dict:
    if args.method == "hmm" and args.seed is None:
        raise UsageError("detect --method hmm needs --seed")
    cfg = _resolve_config(args)
    return {
        "command": "detect",
        "method": args.method,
        "profile": args.profile,
        "config": config_to_dict(cfg),
        "inputs": _abs(args.input),
        "input_kind": args.kind,
        "train": _abs(args.train or []),
        "seed": args.seed,
        "output": str(Path(args.output).resolve()),
    }


def _detect_one(method, cfg, series, params):
    if method == "mse":
        return mse_detect(series, cfg)
    if method.startswith("forecast-"):
        return forecast_detect(series, cfg)
    if method == "mle":
        return mle_detect(series, cfg)[1]
    if method == "hmm":
        return hmm_detect(series, params, cfg.sg_window, cfg.sg_order)
    if method == "mse-multi":
        return mse_multi_detect(series, cfg)
    return hist_detect(series, cfg)


def run_detect(m: dict, jobs: int = 1):
    method = m["method"]
    cfg = config_from_dict(method, m["config"])
    if method in MULTIVARIATE:
        load = vio.read_histograms
    else:
        def load(p):
            return vio.read_series(p, m["input_kind"])
    ids = [video_id(p) for p in m["inputs"]]
    if len(set(ids)) != len(ids):
        raise UsageError("two inputs map to the same video id")
    series = {vid: load(p) for vid, p in zip(ids, m["inputs"])}
    params = None
    if method == "hmm":
        train = [load(p) for p in m["train"]] or list(series.values())
        params = hmm_fit(train, seed=m["seed"], max_iter=cfg.max_iter, tol=cfg.tol)
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        sets = dict(zip(ids, pool.map(lambda v: _detect_one(method, cfg, series[v], params), ids)))
    vio.write_changepoints(m["output"], sets)
    return sets


# ----------------------------------------------------------------------- eval

def manifest_eval(args) -> dict:
    if args.window < 0:
        raise UsageError("--window must be nonnegative")
    return {
        "command": "eval",
        "predictions": str(Path(args.input).resolve()),
        "truth": str(Path(args.truth).resolve()),
        "window": args.window,
        "per_video": bool(args.per_video),
        "format": args.format,
        "output": str(Path(args.output).resolve()) if args.output else None,
    }


_FIELDS = ("true_total", "predicted_total", "true_matched", "predicted_matched",
           "recall", "precision")


def evaluation_report(m: dict) -> str:
    pred = vio.read_changepoints(m["predictions"])
    truth = vio.read_truth(m["truth"])
    empty = ChangePointSet([])
    rows = {vid: evaluate(pred.get(vid, empty), truth.get(vid, empty), m["window"])
            for vid in sorted(set(pred) | set(truth))}
    if not rows:
        raise DataError("neither file names any video", m["truth"])
    rep = aggregate(rows.values())

    def ratios(c):
        return (c.true_matched / c.true_total if c.true_total else 1.0,
                c.predicted_matched / c.predicted_total if c.predicted_total else 1.0)

    if m["format"] == "json":
        doc = {"window": rep.window, "aggregate": {k: getattr(rep, k) for k in _FIELDS}}
        if m["per_video"]:
            doc["videos"] = [
                dict(video_id=vid, true_total=c.true_total, predicted_total=c.predicted_total,
                     true_matched=c.true_matched, predicted_matched=c.predicted_matched,
                     recall=ratios(c)[0], precision=ratios(c)[1])
                for vid, c in rows.items()]
        return json.dumps(doc, indent=2) + "\n"
    lines = [f"window={vio.fmt(rep.window)}"]
    lines += [f"{k}={vio.fmt(getattr(rep, k))}" for k in _FIELDS]
    if m["per_video"]:
        lines.append("video_id," + ",".join(_FIELDS))
        for vid, c in rows.items():
            r, p = ratios(c)
            lines.append(f"{vid},{c.true_total},{c.predicted_total},{c.true_matched},"
                         f"{c.predicted_matched},{vio.fmt(r)},{vio.fmt(p)}")
    return "\n".join(lines) + "\n"


def run_eval(m: dict, jobs: int = 1):
    text = evaluation_report(m)
    if m["output"]:
        vio.atomic_write(m["output"], text)
    return text


# ------------------------------------------------------------------------- vq

def manifest_vq(args) -> dict:
    if args.codebook is None:
        if not (args.neg and args.pos and args.K):
            raise UsageError("vq needs --codebook, or --neg, --pos and --K to build one")
        if args.seed is None:
            raise UsageError("building a codebook needs --seed")
    if args.E <= 0:
        raise UsageError("--E must be positive")
    return {
        "command": "vq",
        "inputs": _abs(args.input),
        "codebook": str(Path(args.codebook).resolve()) if args.codebook else None,
        "neg": _abs(args.neg or []),
        "pos": _abs(args.pos or []),
        "K": args.K,
        "seed": args.seed,
        "max_iter": args.max_iter,
        "mode": args.mode,
        "E": args.E,
        "pyramid": args.pyramid,
        "period": args.period,
        "origin": args.origin,
        "output": str(Path(args.output).resolve()),
    }


def _pool_descriptors(paths):
    vecs = [ds.vectors for p in paths for _, ds in vio.read_descriptors(p)]
    return DescriptorSet(np.vstack(vecs))


def _frame_histogram(ds, cb, m):
    if m["pyramid"] is not None:
        return build_pyramid(ds, cb, m["pyramid"], m["mode"], m["E"]).flat
    if m["mode"] == "soft":
        return soft_vq(ds, cb, m["E"])
    return hard_vq(ds, cb)


def run_vq(m: dict, jobs: int = 1):
    out = Path(m["output"])
    if m["codebook"]:
        cb = vio.read_codebook(m["codebook"])
    else:
        cb = build_codebook(_pool_descriptors(m["neg"]), _pool_descriptors(m["pos"]),
                            m["K"], seed=m["seed"], max_iter=m["max_iter"])
        vio.write_codebook(out / "codebook.csv", cb)
    for path in m["inputs"]:
        frames = sorted(vio.read_descriptors(path), key=lambda f: f[0])
        hist = np.vstack([_frame_histogram(ds, cb, m) for _, ds in frames])
        vio.write_histograms(out / f"{video_id(path)}.hist.csv",
                             HistogramSeries(hist, m["period"], m["origin"]))


# ------------------------------------------------------------------- condense

def manifest_condense(args) -> dict:
    return {
        "command": "condense",
        "inputs": _abs(args.input),
        "codebook": str(Path(args.codebook).resolve()),
        "cutoff": "inf" if np.isinf(args.cutoff) else args.cutoff,
        "depth": args.depth,
        "pooled": bool(args.pooled),
        "output": str(Path(args.output).resolve()),
    }


def run_condense(m: dict, jobs: int = 1):
    out = Path(m["output"])
    cb = vio.read_codebook(m["codebook"])
    cutoff = float(m["cutoff"])
    if m["pooled"]:
        a = cut_by_inconsistency(agglomerate(cb.centroids), cutoff, m["depth"])
    else:
        a = condense_codebook(cb, cutoff, m["depth"])
    vio.write_assignment(out / "assignment.csv", a)
    for path in m["inputs"]:
        h = vio.read_histograms(path)
        if h.n_bins != a.n_centroids:
            raise DataError(f"{h.n_bins} bins but the codebook has {a.n_centroids} centroids", path)
        vio.write_histograms(out / f"{video_id(path)}.hist.csv", condense_series(h, a))


# ---------------------------------------------------------------------- synth

def manifest_synth(args) -> dict:
    if args.seed is None:
        raise UsageError("synth needs --seed")
    if args.corpus is None and args.n is None:
        raise UsageError("synth needs --n (or --corpus)")
    changes = None
    if args.changes is not None:
        try:
            changes = [int(t) for t in args.changes.split(",") if t.strip()]
        except ValueError:
            raise UsageError("--changes expects comma-separated integer indices") from None
    return {
        "command": "synth",
        "corpus": args.corpus,
        "n": args.n,
        "changes": changes,
        "switch_prob": args.switch_prob,
        "videos": args.videos,
        "mu": args.mu,
        "sigma": args.sigma,
        "accuracy": args.accuracy,
        "bins": args.bins,
        "period": args.period,
        "seed": args.seed,
        "rng": RNG_NAME,
        "output": str(Path(args.output).resolve()),
    }


def _profiles(B):
    if B == 1:
        return [[5.0], [10.0]]
    ramp = 1.0 + 9.0 * np.arange(B) / (B - 1)
    return [ramp[::-1].tolist(), ramp.tolist()]


def run_synth(m: dict, jobs: int = 1):
    out = Path(m["output"])
    header = {"rng": m["rng"], "seed": m["seed"]}
    truth = {}
    if m["corpus"] is not None:
        acc = m["accuracy"] if m["accuracy"] is not None else 0.94
        for v in benchmark_corpus(m["corpus"], seed=m["seed"], accuracy=acc,
                                    sample_period=m["period"]):
            vio.write_series(out / f"{v.video_id}.scores.csv", v.scores, header)
            vio.write_series(out / f"{v.video_id}.labels.csv", v.labels, header)
            truth[v.video_id] = v.truth
    else:
        q = m["switch_prob"]
        transition = None if q is None else [[1 - q, q], [q, 1 - q]]
        acc = m["accuracy"] if m["accuracy"] is not None else 0.9
        for i in range(m["videos"]):
            seed = m["seed"] if m["videos"] == 1 else int(
                np.random.SeedSequence([m["seed"], i]).generate_state(1)[0])
            spec = SynthSpec(n=m["n"], change_indices=m["changes"], transition=transition,
                             score_means=(-m["mu"], m["mu"]), score_sigma=(m["sigma"], m["sigma"]),
                             label_accuracy=acc, seed=seed, sample_period=m["period"],
                             hist_profiles=_profiles(m["bins"]) if m["bins"] else None)
            vid = f"video{i:03d}"
            states, truth[vid] = gen_states(spec)
            vio.write_series(out / f"{vid}.scores.csv", gen_scores(states, spec), header)
            vio.write_series(out / f"{vid}.labels.csv",
                             gen_labels(states, acc, seed, m["period"]), header)
            if m["bins"]:
                vio.write_histograms(out / f"{vid}.hist.csv", gen_histograms(states, spec), header)
    vio.write_truth(out / "truth.csv", truth, header)


# ---------------------------------------------------------------------- glue

RUNNERS = {"detect": run_detect, "eval": run_eval, "vq": run_vq,
           "condense": run_condense, "synth": run_synth}
BUILDERS = {"detect": manifest_detect, "eval": manifest_eval, "vq": manifest_vq,
            "condense": manifest_condense, "synth": manifest_synth}


def execute(manifest: dict, jobs: int = 1, quiet: bool = False) -> int:
    """Run a manifest, save it next to the outputs and echo it (or the report)."""
    command = manifest["command"]
    result = RUNNERS[command](manifest, jobs)
    if command == "eval":
        sys.stdout.write(result)
        if manifest["output"]:
            vio.atomic_write(manifest_path(manifest["output"], command), _dump(manifest))
        return EXIT_OK
    vio.atomic_write(manifest_path(manifest["output"], command), _dump(manifest))
    if not quiet:
        sys.stdout.write(_dump(manifest))
    return EXIT_OK


def _common(p, output_required=True):
    p.add_argument("--output", required=output_required, help="output file or directory")
    p.add_argument("--config", help="key = value settings file (flags win)")
    p.add_argument("--seed", type=int, help="seed for randomized steps")
    p.add_argument("--profile", choices=("cnn", "svm"), default="cnn",
                   help="published parameter set to start from")
    p.add_argument("--jobs", type=int, default=1, help="worker threads")
    p.add_argument("--quiet", action="store_true", help="do not echo the run manifest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vidcpd", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"vidcpd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run a change-point detector over series files")
    p.add_argument("--method", required=True, choices=UNIVARIATE + MULTIVARIATE)
    p.add_argument("--input", nargs="+", required=True, help="one series file per video")
    p.add_argument("--kind", choices=("scores", "labels"), default="scores",
                   help="how to parse univariate inputs")
    p.add_argument("--train", nargs="*", help="series to fit the HMM on (default: the inputs)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one setting")
    _common(p)

    p = sub.add_parser("eval", help="windowed precision/recall against ground truth")
    p.add_argument("--input", required=True, help="change-point file")
    p.add_argument("--truth", required=True, help="ground-truth file")
    p.add_argument("--window", type=float, default=10.0, help="tolerance in seconds")
    p.add_argument("--per-video", action="store_true")
    p.add_argument("--format", choices=("text", "json"), default="text")
    _common(p, output_required=False)

    p = sub.add_parser("vq", help="quantize descriptor files into histogram series")
    p.add_argument("--input", nargs="+", required=True, help="descriptor files, one per video")
    p.add_argument("--codebook", help="existing codebook file")
    p.add_argument("--neg", nargs="*", help="negative-state descriptor files for a new codebook")
    p.add_argument("--pos", nargs="*", help="positive-state descriptor files for a new codebook")
    p.add_argument("--K", type=int, help="centroids per state")
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--mode", choices=("hard", "soft"), default="hard")
    p.add_argument("--E", type=float, default=35.0, help="soft-VQ decay")
    p.add_argument("--pyramid", type=int, choices=(0, 1, 2), help="spatial pyramid depth L")
    p.add_argument("--period", type=float, default=1.0)
    p.add_argument("--origin", type=float, default=0.0)
    _common(p)

    p = sub.add_parser("condense", help="merge codebook bins by inconsistency cutoff")
    p.add_argument("--input", nargs="*", default=[], help="histogram series files")
    p.add_argument("--codebook", required=True)
    p.add_argument("--cutoff", type=_float_arg, required=True, help="'inf' merges everything")
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--pooled", action="store_true",
                   help="cluster all centroids together instead of per state")
    _common(p)

    p = sub.add_parser("synth", help="generate seeded synthetic series and truth")
    p.add_argument("--n", type=int, help="series length")
    p.add_argument("--changes", help="comma-separated change indices")
    p.add_argument("--switch-prob", type=float, help="Markov switching probability")
    p.add_argument("--videos", type=int, default=1)
    p.add_argument("--corpus", type=int, help="benchmark corpus with this many videos")
    p.add_argument("--mu", type=float, default=1.0, help="state means are -mu and +mu")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--accuracy", type=float, help="label accuracy")
    p.add_argument("--bins", type=int, help="also write Poisson histograms with this many bins")
    p.add_argument("--period", type=float, default=1.0)
    _common(p)

    p = sub.add_parser("replay", help="re-run a saved manifest")
    p.add_argument("manifest")
    p.add_argument("--output", help="write outputs here instead")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            try:
                manifest = json.loads(Path(args.manifest).read_text())
            except (OSError, ValueError) as exc:
                raise DataError(f"cannot read manifest: {exc}", args.manifest) from None
            if manifest.get("command") not in RUNNERS:
                raise DataError("manifest names no known command", args.manifest)
            if args.output:
                manifest["output"] = str(Path(args.output).resolve())
        else:
            manifest = BUILDERS[args.command](args)
            manifest["version"] = __version__
        return execute(manifest, args.jobs, args.quiet)
    except (UsageError, InvalidParameter) as exc:
        print(f"vidcpd {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CPDError, OSError) as exc:
        print(f"vidcpd {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
