import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from subfrac import group as G
from subfrac.cli import grid_from_rows, main, parse_group, parse_ygrid, run_verify


def write_points(path, rows):
    np.savetxt(path, np.atleast_2d(rows), delimiter=",")
    return str(path)


def write_grid(path, g, h, n, fn):
    lat = G.Lattice.box([h] * g.dim, [n] * g.dim)
    pts = lat.points().reshape(-1, g.dim)
    with open(path, "w") as fh:
        fh.write(",".join([f"x{k}" for k in range(g.dim)] + ["u"]) + "\n")
        for p, v in zip(pts, fn(pts)):
            fh.write(",".join(repr(float(t)) for t in [*p, v]) + "\n")
    return str(path)


def read_rows(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], float)


# --- parsing ---------------------------------------------------------------

def test_parse_group_forms():
    assert parse_group("heisenberg1").dim == 3
    assert parse_group("euclidean3").dim == 3
    assert parse_group("product(heisenberg1)").dim == 4
    assert parse_group('{"kind": "heisenberg1"}').Q == 4
    with pytest.raises(Exception):
        parse_group("sphere")


def test_parse_ygrid():
    assert np.allclose(parse_ygrid("0:1:0.25"), [0, 0.25, 0.5, 0.75, 1.0])
    assert np.allclose(parse_ygrid("0,0.5,2"), [0, 0.5, 2])


def test_grid_roundtrip_and_errors(tmp_path):
    E1 = G.euclidean(1)
    path = write_grid(tmp_path / "u.csv", E1, 0.5, 3, lambda p: p[:, 0] ** 2)
    from subfrac.cli import read_csv
    rows = read_csv(path)
    lat, u = grid_from_rows(E1, rows)
    assert lat.shape == (7,) and np.allclose(u.values, lat.points()[..., 0] ** 2)
    with pytest.raises(ValueError):
        grid_from_rows(E1, rows[:-1])
    with pytest.raises(ValueError):
        grid_from_rows(G.euclidean(2), rows)


# --- subcommands -----------------------------------------------------------

def test_group_info(tmp_path, capsys):
    assert main(["group-info", "--group", "heisenberg1"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["Q"] == 4
    out = tmp_path / "g.json"
    assert main(["group-info", "--group", "euclidean2", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["Q"] == 2


def test_heat(tmp_path):
    pts = write_points(tmp_path / "p.csv", [[0, 0, 0], [1, 0, 0]])
    out = tmp_path / "h.csv"
    assert main(["heat", "--group", "heisenberg1", "--t", "1", "--points", pts, "--out", str(out)]) == 0
    head, rows = read_rows(out)
    assert head == ["x1", "x2", "x3", "h"]
    assert rows[0, 3] == pytest.approx(1 / 64, rel=1e-6)
    assert rows[1, 3] < rows[0, 3]


def test_heat_monte_carlo_is_seeded(tmp_path):
    pts = write_points(tmp_path / "p.csv", [[0.0]])
    outs = []
    for k in range(2):
        out = tmp_path / f"m{k}.csv"
        main(["heat", "--group", "euclidean1", "--t", "1", "--points", pts, "--mc", "--paths", "2000",
              "--seed", "5", "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    head, rows = read_rows(tmp_path / "m0.csv")
    assert head[-1] == "stderr" and rows[0, -1] > 0


def test_heat_rejects_wrong_columns(tmp_path):
    pts = write_points(tmp_path / "p.csv", [[0.0, 1.0]])
    with pytest.raises(SystemExit):
        main(["heat", "--group", "heisenberg1", "--t", "1", "--points", pts])


@pytest.mark.parametrize("family,param", [("riesz", "2"), ("rtilde", "1"), ("poisson", "0.2")])
def test_kernel(tmp_path, family, param):
    pts = write_points(tmp_path / "p.csv", [[1, 0, 0], [0, 0, 1]])
    out = tmp_path / "k.csv"
    assert main(["kernel", "--family", family, "--group", "heisenberg1", "--param", param,
                 "--points", pts, "--out", str(out)]) == 0
    head, rows = read_rows(out)
    assert head[-1] == family and np.all(rows[:, -1] > 0)
    if family == "riesz":
        assert np.allclose(rows[:, -1] * 8 * np.pi, 1.0, rtol=1e-6)


def test_frac_routes_and_report(tmp_path):
    inp = write_grid(tmp_path / "u.csv", G.euclidean(1), 0.1, 60, lambda p: np.exp(-p[:, 0] ** 2))
    out, rep = tmp_path / "f.csv", tmp_path / "r.json"
    assert main(["frac", "--group", "euclidean1", "--alpha", "1", "--in", inp, "--out", str(out),
                 "--report", str(rep)]) == 0
    head, rows = read_rows(out)
    assert head == ["x1", "fft", "pv", "riesz", "spectral"]
    assert json.loads(rep.read_text())["passed"]
    out2 = tmp_path / "f2.csv"
    assert main(["frac", "--group", "euclidean1", "--a", "0", "--route", "spectral", "--in", inp,
                 "--out", str(out2)]) == 0
    assert np.allclose(read_rows(out2)[1][:, 1], rows[:, 4])


def test_frac_alpha_flags_exclusive(tmp_path):
    inp = write_grid(tmp_path / "u.csv", G.euclidean(1), 0.1, 20, lambda p: np.exp(-p[:, 0] ** 2))
    for extra in ([], ["--alpha", "1", "--a", "0"], ["--alpha", "2.5"]):
        with pytest.raises(SystemExit):
            main(["frac", "--group", "euclidean1", "--in", inp, *extra])


@pytest.mark.parametrize("method", ["spectral", "poisson"])
def test_extend(tmp_path, method):
    inp = write_grid(tmp_path / "u.csv", G.euclidean(1), 0.1, 40, lambda p: np.exp(-p[:, 0] ** 2))
    out = tmp_path / "v.csv"
    assert main(["extend", "--group", "euclidean1", "--a", "0.3", "--in", inp, "--ygrid", "0:0.5:0.25",
                 "--method", method, "--out", str(out)]) == 0
    head, rows = read_rows(out)
    assert head == ["x1", "y", "v"]
    assert rows.shape == (3 * 81, 3)
    assert set(np.unique(rows[:, 1])) == {0.0, 0.25, 0.5}


def test_harnack_and_config_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"group": "euclidean1", "spacing": 0.05, "instances": 3}))
    outs = []
    for k in range(2):
        out = tmp_path / f"h{k}.json"
        assert main(["harnack", "--config", str(cfg), "--dilate", "2", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rep = json.loads(outs[0])
    assert len(rep["campaign"]["instances"]) == 3
    assert rep["dilation"]["max_drift"] <= 1e-9


def test_config_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(SystemExit):
        main(["group-info", "--config", str(cfg)])


def test_verify_group_suite(capsys):
    assert main(["verify", "--suite", "group"]) == 0
    assert json.loads(capsys.readouterr().out)["passed"]
    with pytest.raises(ValueError):
        run_verify("nonsense")


def test_unknown_suite_exits_2():
    proc = subprocess.run([sys.executable, "-m", "subfrac.cli", "verify", "--suite", "nonsense"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "invalid choice" in proc.stderr


@pytest.mark.slow
def test_verify_all_passes():
    code, report = run_verify("all")
    assert code == 0 and report["passed"]
