"""Plain-text file formats.

All formats are comma-separated with an optional ``# key=value ...`` header
line. Floats are written with ``repr`` so files round-trip exactly and are
byte-stable across runs.
"""

from __future__ import annotations

import os
import tempfile
from collections import OrderedDict
from pathlib import Path

import numpy as np

from .bovw import Codebook, DescriptorSet
from .condense import BinAssignment
from .errors import DataError, InvalidInput
from .series import ChangePointSet, HistogramSeries, LabelSeries, ScoreSeries

__all__ = [
    "fmt",
    "atomic_write",
    "read_series",
    "write_series",
    "read_histograms",
    "write_histograms",
    "read_descriptors",
    "write_descriptors",
    "read_codebook",
    "write_codebook",
    "read_assignment",
    "write_assignment",
    "read_changepoints",
    "write_changepoints",
    "read_truth",
    "write_truth",
]


def fmt(x) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_header(line, path, lineno, required=()):
    fields = {}
    for tok in line.lstrip("#").split():
        if "=" not in tok:
            raise DataError(f"malformed header token {tok!r}", path, lineno)
        k, v = tok.split("=", 1)
        fields[k] = v
    missing = [k for k in required if k not in fields]
    if missing:
        raise DataError(f"header lacks {', '.join(missing)}", path, lineno)
    return fields


def _float(tok, path, lineno):
    try:
        v = float(tok)
    except ValueError:
        raise DataError(f"not a number: {tok!r}", path, lineno) from None
    if not np.isfinite(v):
        raise DataError(f"non-finite value {tok!r}", path, lineno)
    return v


def _int(tok, path, lineno):
    try:
        return int(tok)
    except ValueError:
        raise DataError(f"not an integer: {tok!r}", path, lineno) from None


def _lines(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if line:
                yield lineno, line


def _timing(fields, path, lineno):
    period = _float(fields.get("period", "1"), path, lineno)
    origin = _float(fields.get("origin", "0"), path, lineno)
    if period <= 0 or origin < 0:
        raise DataError("period must be > 0 and origin >= 0", path, lineno)
    return period, origin


def read_series(path, kind: str = "scores"):
    """Read ``index,value`` records under a ``# period=.. origin=..`` header."""
    period, origin = 1.0, 0.0
    values = []
    for lineno, line in _lines(path):
        if line.startswith("#"):
            if values:
                raise DataError("header must precede the records", path, lineno)
            period, origin = _timing(_parse_header(line, path, lineno), path, lineno)
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DataError("expected 'index,value'", path, lineno)
        idx = _int(parts[0].strip(), path, lineno)
        if idx != len(values):
            raise DataError(f"expected index {len(values)}, got {idx}", path, lineno)
        v = _float(parts[1].strip(), path, lineno)
        if kind == "labels" and v not in (0.0, 1.0):
            raise DataError(f"label must be 0 or 1, got {parts[1].strip()!r}", path, lineno)
        values.append(v)
    if not values:
        raise DataError("series file has no records", path)
    if kind == "labels":
        return LabelSeries(np.array(values, dtype=np.int8), period, origin)
    return ScoreSeries(values, period, origin)


def _extra(header):
    return "".join(f" {k}={v}" for k, v in (header or {}).items())


def write_series(path, s, header: dict | None = None):
    """``header`` adds ``key=value`` tokens (no spaces) after period and origin."""
    rows = [f"# period={fmt(s.sample_period)} origin={fmt(s.origin)}{_extra(header)}"]
    vals = s.labels if isinstance(s, LabelSeries) else s.values
    rows += [f"{i},{fmt(v)}" for i, v in enumerate(vals)]
    atomic_write(path, "\n".join(rows) + "\n")


def read_histograms(path) -> HistogramSeries:
    header, frames = None, []
    for lineno, line in _lines(path):
        if line.startswith("#"):
            header = _parse_header(line, path, lineno, ("B",))
            B = _int(header["B"], path, lineno)
            period, origin = _timing(header, path, lineno)
            continue
        if header is None:
            raise DataError("missing '# B=.. period=.. origin=..' header", path, lineno)
        row = [_float(t, path, lineno) for t in line.split(",")]
        if len(row) != B:
            raise DataError(f"expected {B} bins, got {len(row)}", path, lineno)
        if min(row) < 0:
            raise DataError("histogram bins must be nonnegative", path, lineno)
        frames.append(row)
    if not frames:
        raise DataError("histogram file has no frames", path)
    return HistogramSeries(np.array(frames), period, origin)


def write_histograms(path, h: HistogramSeries, header: dict | None = None):
    rows = [f"# B={h.n_bins} period={fmt(h.sample_period)} origin={fmt(h.origin)}{_extra(header)}"]
    rows += [",".join(fmt(v) for v in frame) for frame in h.frames]
    atomic_write(path, "\n".join(rows) + "\n")


def read_descriptors(path):
    """Frame blocks ``# frame= width= height= count= dim=`` followed by ``x,y,v1..vd`` rows.

    Returns a list of ``(frame_index, DescriptorSet)`` with positions
    normalized by the frame size.
    """
    frames = []
    block = None

    def close(lineno):
        if block is None:
            return
        if len(block["rows"]) != block["count"]:
            raise DataError(f"frame {block['frame']} declares {block['count']} descriptors, "
                            f"found {len(block['rows'])}", path, lineno)
        rows = np.array(block["rows"]).reshape(-1, 2 + block["dim"])
        ds = DescriptorSet.from_pixels(rows[:, 2:], rows[:, :2], block["width"], block["height"])
        frames.append((block["frame"], ds))

    last = 0
    for lineno, line in _lines(path):
        last = lineno
        if line.startswith("#"):
            close(lineno)
            h = _parse_header(line, path, lineno, ("frame", "width", "height", "count", "dim"))
            block = {k: _int(h[k], path, lineno) for k in ("frame", "count", "dim")}
            block.update(width=_float(h["width"], path, lineno),
                         height=_float(h["height"], path, lineno), rows=[])
            if block["dim"] < 1 or block["width"] <= 0 or block["height"] <= 0:
                raise DataError("dim, width and height must be positive", path, lineno)
            continue
        if block is None:
            raise DataError("descriptor row before any frame header", path, lineno)
        row = [_float(t, path, lineno) for t in line.split(",")]
        if len(row) != 2 + block["dim"]:
            raise DataError(f"expected x,y plus {block['dim']} values", path, lineno)
        block["rows"].append(row)
    close(last)
    if not frames:
        raise DataError("descriptor file has no frames", path)
    return frames


def write_descriptors(path, frames, width=1.0, height=1.0):
    """``frames`` is a list of ``(frame_index, DescriptorSet)`` with normalized positions."""
    rows = []
    for idx, ds in frames:
        rows.append(f"# frame={idx} width={fmt(width)} height={fmt(height)} "
                    f"count={len(ds)} dim={ds.dim}")
        pos = ds.positions if ds.positions is not None else np.zeros((len(ds), 2))
        for (x, y), v in zip(pos, ds.vectors):
            rows.append(",".join([fmt(x * width), fmt(y * height)] + [fmt(a) for a in v]))
    atomic_write(path, "\n".join(rows) + "\n")


def read_codebook(path) -> Codebook:
    header, rows = None, []
    for lineno, line in _lines(path):
        if line.startswith("#"):
            header = _parse_header(line, path, lineno, ("K", "dim"))
            K, dim = _int(header["K"], path, lineno), _int(header["dim"], path, lineno)
            continue
        if header is None:
            raise DataError("missing '# K=.. dim=..' header", path, lineno)
        row = [_float(t, path, lineno) for t in line.split(",")]
        if len(row) != dim:
            raise DataError(f"expected {dim} values", path, lineno)
        rows.append(row)
    if header is None or len(rows) != 2 * K:
        raise DataError(f"codebook must hold 2K centroid rows", path)
    return Codebook(np.array(rows), K)


def write_codebook(path, cb: Codebook):
    rows = [f"# K={cb.per_state_count} dim={cb.dim}"]
    rows += [",".join(fmt(v) for v in c) for c in cb.centroids]
    atomic_write(path, "\n".join(rows) + "\n")


def read_assignment(path) -> BinAssignment:
    header, pairs = None, {}
    for lineno, line in _lines(path):
        if line.startswith("#"):
            header = _parse_header(line, path, lineno, ("B",))
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DataError("expected 'centroid_index,bin_index'", path, lineno)
        c, b = _int(parts[0], path, lineno), _int(parts[1], path, lineno)
        if c in pairs:
            raise DataError(f"centroid {c} assigned twice", path, lineno)
        pairs[c] = b
    if header is None or not pairs:
        raise DataError("bin assignment needs a '# B=..' header and records", path)
    if sorted(pairs) != list(range(len(pairs))):
        raise DataError("centroid indices must cover 0..C-1", path)
    try:
        return BinAssignment([pairs[c] for c in range(len(pairs))], int(header["B"]))
    except InvalidInput as exc:
        raise DataError(str(exc), path) from None


def write_assignment(path, a: BinAssignment):
    rows = [f"# B={a.n_bins}"] + [f"{c},{b}" for c, b in enumerate(a.mapping)]
    atomic_write(path, "\n".join(rows) + "\n")


def read_changepoints(path):
    """``video_id,time_seconds[,detector]`` rows; returns {video_id: ChangePointSet}.

    A row with an empty time declares a video with no change-points.
    """
    times = OrderedDict()
    detectors = {}
    for lineno, line in _lines(path):
        if line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (2, 3) or not parts[0]:
            raise DataError("expected 'video_id,time_seconds[,detector]'", path, lineno)
        vid = parts[0]
        times.setdefault(vid, [])
        if len(parts) == 3:
            detectors[vid] = parts[2]
        if parts[1] == "":
            continue
        t = _float(parts[1], path, lineno)
        if t < 0:
            raise DataError("change-point time must be nonnegative", path, lineno)
        times[vid].append(t)
    return {vid: ChangePointSet.from_unsorted(ts, detectors.get(vid, ""))
            for vid, ts in sorted(times.items())}


read_truth = read_changepoints


def write_changepoints(path, sets: dict, with_detector: bool = True,
                       header: dict | None = None):
    """Rows sorted by video id then time; videos without points get an empty-time row."""
    rows = [f"#{_extra(header)}"] if header else []
    for vid in sorted(sets):
        cps = sets[vid]
        tail = f",{cps.detector}" if with_detector else ""
        if len(cps) == 0:
            rows.append(f"{vid},{tail}")
        rows += [f"{vid},{fmt(t)}{tail}" for t in cps.times]
    atomic_write(path, "\n".join(rows) + ("\n" if rows else ""))


def write_truth(path, sets: dict, header: dict | None = None):
    write_changepoints(path, sets, with_detector=False, header=header)
