import csv
import hashlib
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from airspread.cli import main
from airspread.geometry import regular_part
from airspread.parameters import TABLE1
from airspread.reproduction import R0Inputs, r0_tcl

ONE_HOST = """
[[hosts]]
position = [0.0, 0.0]
[simulation]
D0 = {D0}
t_end = 20.0
variant = "{variant}"
"""


def scenario(tmp_path, text, name="s.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float) if len(rows) > 1 else np.empty((0, len(rows[0])))


def test_decay_scenario(tmp_path):
    cfg = scenario(tmp_path, "[simulation]\nD0 = 1.0\nt_end = 5.0\n")
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    header, data = read_csv(out / "trajectory.csv")
    assert header == ["t", "V"] and data.shape == (500, 2)
    assert np.max(np.abs(data[:, 1] - np.exp(-data[:, 0]))) < 1e-8
    raw = (out / "trajectory.csv").read_bytes()
    assert b"\r" not in raw
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["outputs"] == ["trajectory.csv"]
    assert manifest["config_sha256"] == hashlib.sha256(open(cfg, "rb").read()).hexdigest()
    for key in ("command", "config_path", "seed", "version", "wall_time_s"):
        assert key in manifest


def test_single_host_peak_close_to_tcl(tmp_path):
    peaks = {}
    for variant in ("multiscale", "tcl"):
        cfg = scenario(tmp_path, ONE_HOST.format(D0=2.0, variant=variant), f"{variant}.toml")
        out = tmp_path / variant
        assert main(["simulate", "--config", cfg, "--out", str(out), "--samples", "2001"]) == 0
        header, data = read_csv(out / "trajectory.csv")
        assert header == ["t", "V", "T_1", "E_1", "I_1", "v_1"]
        peaks[variant] = data[np.argmax(data[:, 5]), 0]
    assert abs(peaks["multiscale"] - peaks["tcl"]) <= 0.1 * peaks["tcl"]


def test_simulate_is_byte_identical(tmp_path):
    cfg = scenario(tmp_path, ONE_HOST.format(D0=0.2, variant="multiscale"))
    for d in ("a", "b"):
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a/trajectory.csv").read_bytes() == (tmp_path / "b/trajectory.csv").read_bytes()


def test_bad_key_exit_code(tmp_path, capsys):
    cfg = scenario(tmp_path, "[[hosts]]\nposition = [0, 0]\nbeta_1 = 1.0\n[simulation]\nD0 = 1\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "beta_1" in capsys.readouterr().err


def test_integration_failure_exit_code(tmp_path, capsys):
    cfg = scenario(tmp_path, ONE_HOST.format(D0=0.2, variant="multiscale") + "max_steps = 3\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_r0_without_airborne_route(tmp_path, capsys):
    cfg = scenario(tmp_path, "[[hosts]]\nposition = [0.2, 0.1]\nbeta1 = 0.0\n[simulation]\nD0 = 0.3\n")
    assert main(["r0", "--config", cfg, "--all"]) == 0
    rec = json.loads(capsys.readouterr().out)
    tcl = r0_tcl(R0Inputs(TABLE1, 0.3, 0.3, 0.0))
    for key in ("R0", "R1", "R0_well_mixed", "ngm_value"):
        assert rec[key] == pytest.approx(tcl, rel=1e-15)


def test_r0_expansion_and_ngm_agree(tmp_path, capsys):
    cfg = scenario(tmp_path, ONE_HOST.format(D0=2.0, variant="multiscale"))
    assert main(["r0", "--config", cfg, "--all"]) == 0
    rec = json.loads(capsys.readouterr().out)
    mu = rec["mu"]
    assert abs(rec["R0"] - rec["ngm_value"]) <= (mu / 2.0) ** 2 * 1e-10 * rec["R0"]
    assert rec["R"] == regular_part((0.0, 0.0))


def test_r0_single_method(tmp_path, capsys):
    cfg = scenario(tmp_path, ONE_HOST.format(D0=2.0, variant="multiscale"))
    assert main(["r0", "--config", cfg, "--ngm"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert "ngm_value" in rec and "R0" not in rec


def test_r0_warns_near_wall(tmp_path):
    cfg = scenario(tmp_path, "[domain]\nepsilon = 0.005\n[[hosts]]\nposition = [0.99, 0.0]\n"
                             "[simulation]\nD0 = 1.0\n")
    with pytest.warns(UserWarning, match="expansion degrades"):
        assert main(["r0", "--config", cfg]) == 0


def test_r0_refuses_several_hosts(tmp_path, capsys):
    cfg = scenario(tmp_path, "[[hosts]]\nposition = [0, 0]\n[[hosts]]\nposition = [0.3, 0]\n"
                             "[simulation]\nD0 = 1.0\n")
    assert main(["r0", "--config", cfg]) == 2
    assert "per-host" in capsys.readouterr().err


def test_sweep_trends(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep-r0", "--grid-b1", "1e-8:1e-6:20", "--grid-b2", "1e-8:1e-6:15",
                 "--d0-list", "0.002,0.02,0.2,2", "--out", str(out)]) == 0
    maxima, gaps = [], []
    for D0 in ("0.002", "0.02", "0.2", "2"):
        header, g = read_csv(out / f"r0_D0_{D0}.csv")
        assert header == ["beta1", "beta2", "R1", "R0"] and g.shape == (300, 4)
        # row-major with beta1 outermost
        assert np.all(np.diff(g[:, 0]) >= 0) and g[1, 1] > g[0, 1]
        assert g[:, 2].max() > g[:, 3].max()
        maxima.append(g[:, 3].max())
        gaps.append(np.max((g[:, 2] - g[:, 3]) / g[:, 2]))
    assert all(a > b for a, b in zip(maxima, maxima[1:]))
    assert gaps[-1] < gaps[0]


@pytest.mark.parametrize("grid", ["1e-8:1e-6:0", "1e-6:1e-8:5", "nonsense"])
def test_sweep_bad_grid(grid, tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["sweep-r0", "--grid-b1", grid, "--out", str(tmp_path)])
    assert e.value.code == 2


def test_onset_csv(tmp_path):
    out = tmp_path / "onset"
    assert main(["onset", "--case", "II", "--d0-list", "0.1,2", "--out", str(out)]) == 0
    header, rows = read_csv_rows(out / "onset.csv")
    assert header == ["D0", "case", "onset_1", "onset_2", "delay"]
    assert [r[1] for r in rows] == ["II", "II"]
    for r in rows:
        assert float(r[4]) == pytest.approx(float(r[3]) - float(r[2]), rel=1e-12)


def test_onset_censored(tmp_path):
    out = tmp_path / "onset"
    assert main(["onset", "--case", "I", "--d0-list", "0.2", "--threshold", "1e30",
                 "--out", str(out)]) == 0
    row = (out / "onset.csv").read_text().splitlines()[1].split(",")
    assert row[2:] == ["", "", ""]


def test_onset_custom_needs_config(tmp_path):
    assert main(["onset", "--case", "custom", "--out", str(tmp_path)]) == 2


def test_onset_custom(tmp_path):
    cfg = scenario(tmp_path, "[[hosts]]\nposition = [-0.2, 0]\n[[hosts]]\nposition = [0.2, 0]\n"
                             "[simulation]\nD0 = 1.0\nt_end = 10.0\nexhalation_loss = true\n")
    out = tmp_path / "o"
    assert main(["onset", "--case", "custom", "--config", cfg, "--d0-list", "0.5",
                 "--out", str(out)]) == 0
    _, data = read_csv_rows(out / "onset.csv")
    assert data[0][1] == "custom" and float(data[0][4]) > 0


def read_csv_rows(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_sensitivity_tcl_rows_and_determinism(tmp_path, capsys):
    for d in ("a", "b"):
        assert main(["sensitivity", "--model", "tcl", "--n", "30", "--seed", "4", "--workers", "1",
                     "--out", str(tmp_path / d)]) == 0
    a = (tmp_path / "a/prcc_tcl.csv").read_bytes()
    assert a == (tmp_path / "b/prcc_tcl.csv").read_bytes()
    header, rows = read_csv_rows(tmp_path / "a/prcc_tcl.csv")
    assert len(rows) == 5 and [r[0] for r in rows] == ["beta2", "k", "delta", "p", "c"]
    assert "n_effective=30" in capsys.readouterr().out


def test_sensitivity_ranges_file(tmp_path):
    ranges = scenario(tmp_path, '[[param]]\nname = "beta2"\nlow = 1e-9\nhigh = 1e-6\nscale = "log"\n'
                                '[[param]]\nname = "p"\nlow = 1e9\nhigh = 1e11\nscale = "log"\n', "r.toml")
    assert main(["sensitivity", "--model", "tcl", "--ranges", ranges, "--n", "20",
                 "--workers", "1", "--out", str(tmp_path / "o")]) == 0
    manifest = json.loads((tmp_path / "o/manifest.json").read_text())
    assert manifest["seed"] == 0 and manifest["config_path"] == ranges


def test_sensitivity_missing_ranges(tmp_path):
    assert main(["sensitivity", "--ranges", str(tmp_path / "nope.toml"), "--out", str(tmp_path)]) == 2


def test_greens_check(capsys):
    assert main(["greens-check", "--points", "30", "--seed", "2"]) == 0
    first = capsys.readouterr().out
    assert first.count("PASS") == 5
    main(["greens-check", "--points", "30", "--seed", "2"])
    assert capsys.readouterr().out == first


def test_greens_check_needs_points():
    with pytest.raises(SystemExit) as e:
        main(["greens-check", "--points", "0"])
    assert e.value.code == 2


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "airspread.cli", "greens-check", "--points", "5"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "FAIL" not in r.stdout
