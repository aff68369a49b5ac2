import json
import subprocess
import sys

import pytest

from cli_helpers import all_commands, replay_matches, run
from vidcpd import io as vio


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    return root, all_commands(root)


def manifest_of(path):
    return json.loads(path.read_text())


class TestDetect:
    def test_mse_defaults_in_manifest(self, workspace):
        root, _ = workspace
        cfg = manifest_of(root / "mse.csv.manifest.json")["config"]
        assert (cfg["median_window"], cfg["alpha"], cfg["max_depth"]) == (30, 0.1, 3)

    def test_hmm_defaults_in_manifest(self, workspace):
        root, _ = workspace
        m = manifest_of(root / "hmm.csv.manifest.json")
        assert (m["config"]["sg_window"], m["config"]["sg_order"]) == (15, 1)
        assert m["seed"] == 3 and m["version"]

    def test_output_format(self, workspace):
        root, _ = workspace
        lines = (root / "hmm.csv").read_text().splitlines()
        ids = [ln.split(",")[0] for ln in lines]
        assert ids == sorted(ids) and set(ids) == {"video000", "video001", "video002"}
        assert all(ln.split(",")[2] == "hmm" for ln in lines)

    def test_override_recorded(self, workspace):
        root, _ = workspace
        assert manifest_of(root / "match.csv.manifest.json")["config"]["param"] == 2.0

    def test_unknown_method_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run("detect", "--method", "bogus", "--input", "x", "--output", tmp_path / "o")
        assert exc.value.code == 2

    def test_hmm_needs_seed(self, workspace, tmp_path):
        root, _ = workspace
        s = sorted((root / "synth").glob("*.scores.csv"))
        assert run("detect", "--method", "hmm", "--input", *s, "--output", tmp_path / "o") == 2

    def test_empty_file_is_data_error(self, tmp_path, capsys):
        empty = tmp_path / "v.scores.csv"
        empty.write_text("# period=1 origin=0\n")
        out = tmp_path / "out.csv"
        assert run("detect", "--method", "mse", "--input", empty, "--output", out) == 3
        assert not out.exists()
        assert not (tmp_path / "out.csv.manifest.json").exists()

    def test_parse_error_reports_line(self, tmp_path, capsys):
        bad = tmp_path / "v.scores.csv"
        bad.write_text("0,1\n1,x\n")
        assert run("detect", "--method", "mse", "--input", bad, "--output", tmp_path / "o") == 3
        assert ":2" in capsys.readouterr().err

    def test_config_file_and_flag_precedence(self, workspace, tmp_path):
        root, _ = workspace
        cfgf = tmp_path / "c.cfg"
        cfgf.write_text("alpha = 0.2\nmax_depth = 2\n")
        out = tmp_path / "o.csv"
        labels = sorted((root / "synth").glob("*.labels.csv"))
        assert run("detect", "--method", "mse", "--kind", "labels", "--input", *labels,
                   "--config", cfgf, "--set", "alpha=0.05", "--output", out, "--quiet") == 0
        cfg = manifest_of(tmp_path / "o.csv.manifest.json")["config"]
        assert (cfg["alpha"], cfg["max_depth"]) == (0.05, 2)

    def test_bad_override_is_usage_error(self, workspace, tmp_path):
        root, _ = workspace
        s = sorted((root / "synth").glob("*.scores.csv"))
        assert run("detect", "--method", "mse", "--input", *s, "--set", "nope=1",
                   "--output", tmp_path / "o") == 2

    def test_manifest_echoed(self, workspace, tmp_path, capsys):
        root, _ = workspace
        s = sorted((root / "synth").glob("*.scores.csv"))
        assert run("detect", "--method", "forecast-mean", "--input", *s,
                   "--output", tmp_path / "o.csv") == 0
        echoed = json.loads(capsys.readouterr().out)
        assert echoed == manifest_of(tmp_path / "o.csv.manifest.json")

    def test_jobs_do_not_change_output(self, workspace, tmp_path):
        root, _ = workspace
        s = sorted((root / "synth").glob("*.scores.csv"))
        for j in (1, 4):
            assert run("detect", "--method", "forecast-ar1", "--input", *s, "--jobs", j,
                       "--output", tmp_path / f"j{j}.csv", "--quiet") == 0
        assert (tmp_path / "j1.csv").read_bytes() == (tmp_path / "j4.csv").read_bytes()


class TestEval:
    def test_identical_files_window_zero(self, workspace, capsys):
        root, _ = workspace
        truth = root / "synth" / "truth.csv"
        assert run("eval", "--input", truth, "--truth", truth, "--window", 0) == 0
        out = capsys.readouterr().out
        assert "recall=1\n" in out and "precision=1\n" in out

    def test_empty_predictions(self, workspace, tmp_path, capsys):
        root, _ = workspace
        pred = tmp_path / "p.csv"
        pred.write_text("")
        assert run("eval", "--input", pred, "--truth", root / "synth" / "truth.csv") == 0
        out = capsys.readouterr().out
        assert "recall=0\n" in out and "precision=1\n" in out

    def test_unknown_video_is_precision_only(self, tmp_path, capsys):
        (tmp_path / "t.csv").write_text("a,50\n")
        (tmp_path / "p.csv").write_text("a,52\nb,10\n")
        assert run("eval", "--input", tmp_path / "p.csv", "--truth", tmp_path / "t.csv",
                   "--format", "json", "--per-video") == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["aggregate"]["recall"] == 1.0 and doc["aggregate"]["precision"] == 0.5
        assert [v["video_id"] for v in doc["videos"]] == ["a", "b"]
        assert set(doc["aggregate"]) == {"true_total", "predicted_total", "true_matched",
                                         "predicted_matched", "recall", "precision"}

    def test_default_window(self, tmp_path, capsys):
        (tmp_path / "t.csv").write_text("a,50\n")
        (tmp_path / "p.csv").write_text("a,60\n")
        assert run("eval", "--input", tmp_path / "p.csv", "--truth", tmp_path / "t.csv") == 0
        assert "recall=1\n" in capsys.readouterr().out


class TestSynth:
    def test_twice_identical(self, tmp_path):
        for d in ("a", "b"):
            assert run("synth", "--changes", 50, "--n", 100, "--seed", 1,
                       "--output", tmp_path / d, "--quiet") == 0
        for name in ("video000.scores.csv", "video000.labels.csv", "truth.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        assert (tmp_path / "a" / "truth.csv").read_text().splitlines()[1] == "video000,50"
        assert "rng=" in (tmp_path / "a" / "video000.scores.csv").read_text().splitlines()[0]

    def test_needs_seed(self, tmp_path):
        assert run("synth", "--n", 100, "--output", tmp_path / "x") == 2

    def test_corpus(self, tmp_path):
        assert run("synth", "--corpus", 3, "--seed", 2, "--output", tmp_path, "--quiet") == 0
        assert len(list(tmp_path.glob("*.scores.csv"))) == 3
        assert len(vio.read_series(next(tmp_path.glob("*.scores.csv")))) == 540


class TestVqCondense:
    def test_soft_e35_recorded(self, workspace, tmp_path):
        root, _ = workspace
        vids = sorted((root / "desc").glob("v*.desc.csv"))
        assert run("vq", "--input", *vids, "--codebook", root / "vq" / "codebook.csv",
                   "--mode", "soft", "--E", 35, "--output", tmp_path, "--quiet") == 0
        m = manifest_of(tmp_path / "manifest.json")
        assert (m["mode"], m["E"]) == ("soft", 35.0)
        h = vio.read_histograms(tmp_path / "v0.hist.csv")
        # each frame has 12 descriptors, each contributing a unit of mass
        assert h.frames.sum(axis=1) == pytest.approx(12.0)

    def test_building_codebook_needs_seed(self, workspace, tmp_path):
        root, _ = workspace
        d = root / "desc"
        assert run("vq", "--input", d / "v0.desc.csv", "--neg", d / "neg.desc.csv",
                   "--pos", d / "pos.desc.csv", "--K", 2, "--output", tmp_path) == 2

    def test_cutoff_inf_pooled_single_bin(self, workspace, tmp_path):
        root, _ = workspace
        hists = sorted((root / "vq_hard").glob("*.hist.csv"))
        assert run("condense", "--codebook", root / "vq" / "codebook.csv", "--cutoff", "inf",
                   "--pooled", "--input", *hists, "--output", tmp_path, "--quiet") == 0
        h = vio.read_histograms(tmp_path / "v0.hist.csv")
        assert h.n_bins == 1
        assert h.frames[:, 0] == pytest.approx(12.0)

    def test_cutoff_inf_per_state_two_bins(self, workspace, tmp_path):
        root, _ = workspace
        hists = sorted((root / "vq_hard").glob("*.hist.csv"))
        assert run("condense", "--codebook", root / "vq" / "codebook.csv", "--cutoff", "inf",
                   "--input", *hists, "--output", tmp_path, "--quiet") == 0
        assert vio.read_histograms(tmp_path / "v0.hist.csv").n_bins == 2


class TestReplay:
    def test_every_command_replays_byte_for_byte(self, workspace, tmp_path):
        _, runs = workspace
        for name, manifest, outputs in runs:
            assert replay_matches(name, manifest, outputs, tmp_path), name

    def test_missing_manifest(self, tmp_path):
        assert run("replay", tmp_path / "nope.json") == 3


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "vidcpd", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("vidcpd ")
