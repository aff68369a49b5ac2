"""Shared driver that exercises every CLI command in a scratch directory."""

import filecmp
import shutil
from pathlib import Path

import numpy as np

from vidcpd import io as vio
from vidcpd.bovw import DescriptorSet
from vidcpd.cli import main


def run(*argv):
    return main([str(a) for a in argv])


def descriptor_file(path, seed, frames=6, per_frame=12, dim=4, shift=0.0):
    rng = np.random.default_rng(seed)
    data = [(i, DescriptorSet(rng.normal(shift, 1.0, (per_frame, dim)), rng.random((per_frame, 2))))
            for i in range(frames)]
    vio.write_descriptors(path, data, width=320, height=240)
    return path


def snapshot(paths):
    return {Path(p): Path(p).read_bytes() for p in paths}


def all_commands(root: Path):
    """Run each command once; return ``[(name, manifest, output_paths)]``."""
    root = Path(root)
    out = []

    syn = root / "synth"
    assert run("synth", "--n", 120, "--changes", "40,80", "--videos", 3, "--bins", 4,
               "--seed", 7, "--output", syn, "--quiet") == 0
    out.append(("synth", syn / "manifest.json", sorted(p for p in syn.iterdir()
                                                       if p.name != "manifest.json")))

    scores = sorted(syn.glob("*.scores.csv"))
    labels = sorted(syn.glob("*.labels.csv"))
    hists = sorted(syn.glob("*.hist.csv"))
    for method, inputs, extra in [
        ("mse", labels, ["--kind", "labels"]),
        ("forecast-ar1", scores, []),
        ("forecast-mean", scores, ["--profile", "svm"]),
        ("mle", labels, ["--kind", "labels"]),
        ("hmm", scores, ["--seed", 3]),
        ("chi2", hists, []),
        ("match", hists, ["--set", "constant=2"]),
        ("mse-multi", hists, []),
    ]:
        dest = root / f"{method}.csv"
        assert run("detect", "--method", method, "--input", *inputs, *extra,
                   "--output", dest, "--quiet") == 0
        out.append((f"detect:{method}", Path(str(dest) + ".manifest.json"), [dest]))

    report = root / "report.txt"
    assert run("eval", "--input", root / "hmm.csv", "--truth", syn / "truth.csv",
               "--per-video", "--output", report) == 0
    out.append(("eval", Path(str(report) + ".manifest.json"), [report]))

    desc = root / "desc"
    desc.mkdir()
    neg = descriptor_file(desc / "neg.desc.csv", 1, shift=-2)
    pos = descriptor_file(desc / "pos.desc.csv", 2, shift=2)
    vids = [descriptor_file(desc / f"v{i}.desc.csv", 10 + i) for i in range(2)]
    vq = root / "vq"
    assert run("vq", "--input", *vids, "--neg", neg, "--pos", pos, "--K", 3, "--seed", 5,
               "--mode", "soft", "--pyramid", 1, "--output", vq, "--quiet") == 0
    out.append(("vq", vq / "manifest.json", sorted(p for p in vq.iterdir()
                                                   if p.name != "manifest.json")))

    vq_hard = root / "vq_hard"
    assert run("vq", "--input", *vids, "--codebook", vq / "codebook.csv",
               "--output", vq_hard, "--quiet") == 0
    con = root / "condense"
    assert run("condense", "--codebook", vq / "codebook.csv", "--cutoff", "1.0",
               "--input", *sorted(vq_hard.glob("*.hist.csv")), "--output", con, "--quiet") == 0
    out.append(("condense", con / "manifest.json", sorted(p for p in con.iterdir()
                                                          if p.name != "manifest.json")))
    return out


def replay_matches(name, manifest, outputs, scratch: Path):
    """Replay into ``scratch`` and in place; both must reproduce every byte."""
    before = snapshot(outputs)
    if run("replay", manifest, "--quiet") != 0:
        return False
    if snapshot(outputs) != before:
        return False
    # also replay into a fresh directory and compare file by file
    fresh = scratch / name.replace(":", "_")
    if fresh.exists():
        shutil.rmtree(fresh)
    fresh.mkdir(parents=True)
    single = len(outputs) == 1 and not name.startswith(("synth", "vq", "condense"))
    target = fresh / outputs[0].name if single else fresh
    if run("replay", manifest, "--output", target, "--quiet") != 0:
        return False
    for p in outputs:
        q = target if single else fresh / p.name
        if not q.exists() or not filecmp.cmp(p, q, shallow=False):
            return False
    return True
