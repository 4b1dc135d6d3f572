import json

import pytest

from ridgekit import cli, verify
from ridgekit.geometry import builtin


def call(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_disc(capsys):
    code, out, _ = call(capsys, "classify", "--builtin", "disc", "--point", "0.5,0")
    assert code == 0
    rec = json.loads(out)
    assert rec["classification"] == "RegularPoint"
    assert rec["d"] == pytest.approx(0.5) and rec["rho_star"] == pytest.approx(1.0, abs=1e-6)


def test_classify_csv_many(capsys):
    code, out, _ = call(capsys, "classify", "--builtin", "disc_halfplane", "--point", "1,1", "--point", "0,0.5", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 3
    assert "BoundaryCase" in lines[1] and "CutLocusPoint" in lines[2]


def test_rho_vertex(capsys):
    code, out, _ = call(capsys, "rho", "--builtin", "ellipse", "--param", "a=2,b=1", "--at", "vertex")
    assert code == 0
    rec = json.loads(out)
    assert rec["rho"] == pytest.approx(0.5, abs=1e-3)
    assert rec["rho_from_curvature"] == pytest.approx(0.5, rel=1e-12)


def test_invalid_input_exit_code(capsys):
    code, out, err = call(capsys, "classify", "--builtin", "disc", "--point", "2,0")
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "not_interior_point"
    code, _, err = call(capsys, "classify", "--builtin", "nope", "--point", "0,0")
    assert code == 2 and "error" in json.loads(err)
    code, _, err = call(capsys, "skeleton", "--builtin", "disc", "--grid-res", "-1")
    assert code == 2
    code, _, err = call(capsys, "classify", "--builtin", "disc", "--point", "0.5,0", "--tol", "bogus=1")
    assert code == 2
    code, _, err = call(capsys, "skeleton", "--builtin", "disc", "--format", "svg")
    assert code == 2


def test_tolerance_override(capsys):
    code, out, _ = call(capsys, "classify", "--builtin", "disc", "--point", "0.5,0", "--tol", "env_radii=0.2,0.1")
    assert code == 0 and json.loads(out)["classification"] == "RegularPoint"


def test_skeleton_output_is_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        p = tmp_path / f"sk{k}.csv"
        code, _, _ = call(capsys, "skeleton", "--builtin", "disc", "--out", str(p))
        assert code == 0
        outs.append((p.read_bytes(), p.with_suffix(".svg").read_bytes()))
    assert outs[0] == outs[1]
    head = outs[0][0].decode().splitlines()[0]
    assert head == "x,y"


def test_distfield_grid_and_pgm(tmp_path, capsys):
    p = tmp_path / "d.pgm"
    code, _, _ = call(capsys, "distfield", "--builtin", "disc", "--format", "pgm", "--out", str(p))
    assert code == 0 and p.read_bytes().startswith(b"P5\n")
    code, out, _ = call(capsys, "distfield", "--builtin", "disc", "--no-figure", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "x,y,d,multi"


def test_eikonal_writes_stats(tmp_path, capsys):
    p = tmp_path / "u.csv"
    code, _, _ = call(capsys, "eikonal", "--builtin", "disc", "--out", str(p), "--no-figure")
    assert code == 0
    stats = json.loads(p.with_suffix(".json").read_text())
    assert stats["stats"]["far_max"] <= 2 / 64 and stats["grid"]["h"] == 1 / 64
    assert p.read_text().splitlines()[0] == "x,y,u,state"


def test_domain_file_round_trip(tmp_path, capsys):
    spec = builtin("ellipse", a=2.0, b=1.0)
    f = tmp_path / "ellipse.json"
    f.write_text(spec.to_json())
    a = call(capsys, "classify", "--domain", str(f), "--point", "1.5,0")
    b = call(capsys, "classify", "--builtin", "ellipse", "--param", "a=2,b=1", "--point", "1.5,0")
    assert a == b and a[0] == 0
    assert json.loads(a[1])["classification"] == "BoundaryCase"


def test_render_svg(tmp_path, capsys):
    p = tmp_path / "o.svg"
    code, _, _ = call(capsys, "render", "--builtin", "disc_halfplane", "--out", str(p))
    assert code == 0
    text = p.read_text()
    assert text.lstrip().startswith("<?xml") and "<svg" in text


def test_verify_exit_codes(monkeypatch, capsys):
    monkeypatch.setattr(verify, "run_for", lambda name, tol, seed: [verify.Check(1, "stub", True), verify.Check(2, "stub", False)])
    code, out, _ = call(capsys, "verify", "--builtin", "disc")
    assert code == 1
    assert "PASS criterion 1 stub" in out and "FAIL criterion 2 stub" in out
    monkeypatch.setattr(verify, "run_for", lambda name, tol, seed: [verify.Check(1, "stub", True)])
    assert call(capsys, "verify", "--builtin", "disc")[0] == 0
    code, _, err = call(capsys, "verify", "--builtin", "ellipse", "--param", "a=3")
    assert code == 2


@pytest.mark.slow
def test_verify_halfplane_regression(tmp_path, capsys):
    code, out, _ = call(capsys, "verify", "--builtin", "disc_halfplane", "--out", str(tmp_path))
    assert code == 0
    assert "BoundaryCase" in out
    assert "PASS criterion 1" in out and "PASS criterion 2" in out
    report = json.loads((tmp_path / "report.json").read_text())
    assert all(c["verdict"] == "PASS" for c in report["checks"])
    assert (tmp_path / "overlay.svg").exists()
