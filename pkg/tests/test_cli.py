import json
import os
from pathlib import Path

import pytest

from leakywire import cli
from leakywire.errors import ConfigError

CIRCLE = ["curve.builtin=circle", "curve.radius=1"]


def invoke(tmp_path, command, settings, capsys=None):
    args = [command]
    for s in list(settings) + [f"output.dir={tmp_path}"]:
        args += ["--set", s]
    return cli.main(args)


def test_parse_happy_path():
    cfg = cli.parse_config("command=spectrum curve.builtin=circle curve.radius=1 alpha=-1.5")
    assert cfg.command == "spectrum" and cfg.alphas == (-1.5,)
    assert cfg.n == 2048 and cfg.theta_count == 64 and cfg.d_rule == "auto"
    assert cfg.curve_params == {"radius": 1.0}


def test_parse_comments_and_overrides():
    text = "# a comment\ncommand = spectrum\ncurve.builtin = circle\nalpha = -1\n"
    cfg = cli.parse_config(text, ["alpha=-2", "grid.n=512"])
    assert cfg.alphas == (-2.0,) and cfg.n == 512


@pytest.mark.parametrize("text,msg", [
    ("command=spectrum curve.builtin=circle curve.samples=x.csv alpha=-1", "conflicting curve sources"),
    ("command=spectrum curve.builtin=circle alpha=-1 d.rule=fixed d.value=-0.1", "tube radius must be positive"),
    ("command=spectrum curve.builtin=circle alpha=-1 colour=red", "unknown config key"),
])
def test_parse_errors(text, msg):
    with pytest.raises(ConfigError, match=msg):
        cli.parse_config(text)


def test_missing_curve_source():
    with pytest.raises(ConfigError):
        cli.parse_config("command=spectrum alpha=-1")


def test_spectrum_smoke(tmp_path):
    assert invoke(tmp_path, "spectrum", CIRCLE + ["alpha=-1.5"]) == 0
    lines = (tmp_path / "spectrum.csv").read_text().splitlines()
    assert lines[0].startswith("j,mu,lambda") and len(lines) >= 2


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("curve.builtin = circle\nalpha = -1.5\nj_max = 3\n")
    assert cli.main(["spectrum", "--config", str(cfg), "--set", f"output.dir={tmp_path}"]) == 0
    assert len((tmp_path / "spectrum.csv").read_text().splitlines()) == 4


def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    s = CIRCLE + ["alpha=-1.5", "with_brackets=true"]
    assert invoke(a, "spectrum", s) == 0 and invoke(b, "spectrum", s) == 0
    assert (a / "spectrum.csv").read_bytes() == (b / "spectrum.csv").read_bytes()


def test_sweep_files(tmp_path):
    assert invoke(tmp_path, "counting", CIRCLE + ["alpha.sweep=-1,-1.5,-2"]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["counting_alpha=-1.5.csv", "counting_alpha=-1.csv", "counting_alpha=-2.csv",
                     "counting_summary.csv"]
    assert len((tmp_path / "counting_summary.csv").read_text().splitlines()) == 4


def test_helix_bands_closed(tmp_path, capsys):
    rc = invoke(tmp_path, "bands", ["curve.builtin=helix", "curve.a=1", "curve.b=1", "curve.mode=periodic",
                                    "grid.n=512", "grid.theta_count=16", "j_max=3"])
    assert rc == 0
    assert "open gaps: 0" in capsys.readouterr().out
    gaps = (tmp_path / "bands_gaps.csv").read_text().splitlines()
    assert gaps[0] == "j,theta_edge,gap,open" and all(l.endswith(",0") for l in gaps[1:])
    assert (tmp_path / "bands.dat").exists()


def _error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_exit_code_solvability(tmp_path, capsys):
    rc = invoke(tmp_path, "transverse", CIRCLE + ["alpha=0.5", "d.rule=fixed", "d.value=1e-6"])
    assert rc == 4
    rec = _error(capsys)
    assert rec["exit_code"] == 4 and "g = " in rec["message"]


def test_exit_code_robin_weight(tmp_path, capsys):
    rc = invoke(tmp_path, "transverse", CIRCLE + ["alpha=-1", "d.rule=fixed", "d.value=0.01",
                                                  "transverse.M=100"])
    assert rc == 4 and "w_d" in _error(capsys)["message"]


def test_exit_code_embedding(tmp_path, capsys):
    rc = invoke(tmp_path, "verify-bracketing", CIRCLE + ["alpha=-1", "d.rule=fixed", "d.value=1.5"])
    assert rc == 3 and _error(capsys)["error"] == "GeometryError"


def test_exit_code_config(tmp_path, capsys):
    assert invoke(tmp_path, "spectrum", CIRCLE + ["alpha=-1", "bogus=1"]) == 2
    assert _error(capsys)["exit_code"] == 2


def test_exit_code_io(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    rc = cli.main(["spectrum", "--set", "curve.builtin=circle", "--set", "alpha=-1",
                   "--set", f"output.dir={blocker / 'sub'}"])
    assert rc == 6


def test_atomic_write_leaves_no_temp(tmp_path):
    p = tmp_path / "out.csv"
    cli.write_atomic(p, "a,b\n1,2\n")
    cli.write_atomic(p, "a,b\n3,4\n")
    assert p.read_text() == "a,b\n3,4\n"
    assert sorted(os.listdir(tmp_path)) == ["out.csv"]
