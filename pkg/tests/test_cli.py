import json
import subprocess
import sys

import pytest

from bersslice.cli import main, parse_complex, read_config, resolve_settings, build_parser


def run(*argv):
    return main(list(argv))


def test_raster_writes_ppm_and_stats(tmp_path, capsys):
    out = tmp_path / "s.ppm"
    assert run("raster", "--center", "0,0", "--size", "4x4", "--res", "16", "--out", str(out)) == 0
    assert out.read_bytes().startswith(b"P6\n16 16\n255\n")
    stats = json.loads((tmp_path / "s.stats.json").read_text())
    assert stats["config"]["resolution"] == 16
    assert "wall_time" in stats and "mean_ode_error" in stats


def test_bad_flags_exit_2(tmp_path, capsys):
    assert run("raster", "--res", "0", "--out", str(tmp_path / "x.ppm")) == 2
    assert "--res" in capsys.readouterr().err
    assert run("raster", "--size", "-1x3", "--out", str(tmp_path / "x.ppm")) == 2
    assert run("raster", "--res", "many", "--out", str(tmp_path / "x.ppm")) == 2
    assert run("raster") == 2  # --out missing
    assert run("frobnicate") == 2


def test_io_error_exit_1(tmp_path, capsys):
    code = run("raster", "--size", "4x4", "--res", "4", "--out", str(tmp_path / "missing" / "x.ppm"))
    assert code == 1
    assert "I/O error" in capsys.readouterr().err
    assert run("centers", "--config", str(tmp_path / "nope.cfg")) == 1


def test_centers_counts(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert run("centers", "--center", "5,5", "--size", "1e-6x1e-6", "--res", "4", "--out", str(out)) == 0
    assert json.loads(out.read_text()) == []
    assert "count 0" in capsys.readouterr().out
    counts = []
    for size, res in (("4x4", 16), ("50x50", 40)):
        assert run("centers", "--size", size, "--res", str(res), "--out", str(out)) == 0
        counts.append(len(json.loads(out.read_text())))
    assert counts == sorted(counts) and counts[-1] >= 3


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# window\nsize = 8x8\nres = 12\nworkers = 2\n")
    args = build_parser().parse_args(["raster", "--config", str(cfg), "--res", "10", "--out", "x.ppm"])
    s = resolve_settings(args)
    assert s["size"] == (8.0, 8.0) and s["res"] == 10 and s["workers"] == 2
    cfg.write_text("colour = blue\n")
    assert run("raster", "--config", str(cfg), "--out", str(tmp_path / "x.ppm")) == 2
    assert read_config  # exposed for scripting


def test_worker_env_only_without_flag(monkeypatch):
    monkeypatch.setenv("BERSSLICE_WORKERS", "3")
    parse = build_parser().parse_args
    assert resolve_settings(parse(["centers"]))["workers"] == 3
    assert resolve_settings(parse(["centers", "--workers", "1"]))["workers"] == 1


def test_stats_echo_effective_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("max_depth = 12\n")
    out = tmp_path / "s.ppm"
    assert run("raster", "--config", str(cfg), "--size", "4x4", "--res", "4", "--out", str(out)) == 0
    stats = json.loads((tmp_path / "s.stats.json").read_text())
    assert stats["config"]["max_depth"] == 12
    assert stats["config"]["width"] == 4


def test_verify(capsys):
    assert run("verify") == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 10
    assert run("verify", "--suite", "elliptic") == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines and all(line.split()[1] == "elliptic:" for line in lines)
    assert run("verify", "--suite", "nosuch") == 2


def test_verify_negative_control(capsys):
    assert run("verify", "--suite", "holonomy", "--theta-perturb", "0.02") == 3
    out = capsys.readouterr().out
    assert "FAIL  holonomy: parabolic puncture" in out


def test_trace_at(capsys):
    assert run("trace-at", "0") == 0
    data = json.loads(capsys.readouterr().out)
    assert data["verdict"] == "fuchsian"
    assert list(data) == ["c", "traces", "kappa", "verdict", "witness", "error"]
    assert all(abs(t[1]) < 1e-9 for t in data["traces"])
    assert run("trace-at", "10,0") == 0
    data = json.loads(capsys.readouterr().out)
    assert data["verdict"] in ("not-discrete", "inconclusive")
    assert data["witness"] == "0/1"
    assert run("trace-at", "abc") == 2


def test_parse_complex():
    assert parse_complex("1.5,-2") == 1.5 - 2j
    assert parse_complex("1.5-2i") == 1.5 - 2j
    assert parse_complex("3j") == 3j


def test_version_and_module_entry(capsys):
    assert run("version") == 0
    assert capsys.readouterr().out.strip() == "0.1.0"
    proc = subprocess.run([sys.executable, "-m", "bersslice", "version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "0.1.0"


@pytest.mark.parametrize("workers", ["1", "2"])
def test_png_output(tmp_path, workers):
    out = tmp_path / "s.png"
    assert run("raster", "--size", "4x4", "--res", "8", "--workers", workers, "--out", str(out)) == 0
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
