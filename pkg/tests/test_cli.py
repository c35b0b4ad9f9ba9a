import math
import subprocess
import sys
import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest

from torus_cycles.cli import det_bounds, run
from torus_cycles.output import Axes, Series, emit_csv, emit_svg, format_value, read_csv


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cycle_prob_closed_form(capsys):
    code, out, _ = call(capsys, "cycle-prob", "--model", "gr", "--sigma", "inf", "--d", "1",
                        "--r", "0.1", "--q", "3")
    assert code == 0
    header, rows = read_csv(out)
    row = dict(zip(header, rows[0]))
    assert abs(row["value"] - 0.03) <= 1e-12
    assert row["converged"] is True and row["method"] == "series"


def test_cycle_prob_radius_out_of_range(capsys):
    code, out, err = call(capsys, "cycle-prob", "--model", "gr", "--sigma", "inf", "--d", "1",
                          "--r", "0.6", "--q", "3")
    assert code == 2
    assert "r must lie in (0, 0.5]" in err
    assert out == ""


def test_psi_rows(capsys):
    code, out, _ = call(capsys, "psi", "--d", "2", "--k-max", "1")
    assert code == 0
    assert out == "k,count\n0,1\n1,4\n"


def test_usage_errors(capsys):
    assert call(capsys, "cycle-prob", "--model", "gr", "--q", "3")[0] == 2
    assert call(capsys, "no-such-command")[0] == 2
    assert call(capsys, "cycle-prob", "--model", "er", "--p", "0.5", "--q", "3", "--sigma", "3")[0] == 2
    assert call(capsys, "spectral", "--n", "5", "--sweep", "1", "0", "5")[0] == 2


def test_numerical_failure_exit_and_fallback(capsys):
    base = ["cycle-prob", "--model", "gr", "--d", "2", "--sigma", "2", "--r", "0.1", "--q", "3",
            "--k-max", "200"]
    code, _, err = call(capsys, *base)
    assert code == 3 and "--mc-fallback" in err
    code, out, err = call(capsys, *base, "--mc-fallback", "--samples", "50000", "--seed", "5")
    assert code == 0 and "warning" in err
    header, rows = read_csv(out)
    assert dict(zip(header, rows[0]))["method"] == "monte-carlo"


def test_capacity_exit(capsys):
    code, _, err = call(capsys, "mc", "--what", "matrix", "--model", "er", "--p", "0.5", "--n", "30",
                        "--samples", "1")
    assert code == 4 and err.startswith("error:")


def test_no_threshold_is_reported_per_row(capsys):
    code, out, err = call(capsys, "threshold", "--model", "gr", "--d", "2", "--sigma", "2", "--n", "3")
    assert code == 0 and "warning" in err
    _, rows = read_csv(out)
    assert rows[0][3] is None


def test_threshold_table(capsys):
    code, out, _ = call(capsys, "threshold", "--model", "both", "--d", "2", "--sigma", "2",
                        "--n", "20")
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["n", "quantity", "model", "edge_probability", "bracket_width"]
    er = [r for r in rows if r[2] == "ER"][0][3]
    gr = [r for r in rows if r[2] != "ER"][0][3]
    assert abs(er - (2 / math.factorial(19)) ** (1 / 20)) <= 1e-6
    assert gr < er


def test_spectral_exact(capsys):
    code, out, _ = call(capsys, "spectral", "--model", "er", "--p", "1/3", "--n", "3", "--exact")
    assert code == 0
    _, rows = read_csv(out)
    p = Fraction(1, 3)
    assert [Fraction(str(c)) for _, c in rows] == [2 * p**3, -3 * p, 0, 1]


def test_spectral_sweep_prints_bounds(capsys, tmp_path):
    svg = tmp_path / "det.svg"
    code, out, err = call(capsys, "spectral", "--n", "8", "--sweep", "0", "1", "11", "--quantity", "det",
                          "--model", "both", "--d", "3", "--sigma", "inf", "--plot", str(svg))
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["p", "ER", "GR d=3 sigma=inf"]
    assert len(rows) == 11
    assert "(n+1)^((n+1)/2)/2^n" in err
    ET.parse(svg)


def test_det_bounds():
    general, regular = det_bounds(20)
    assert general == pytest.approx(21**10.5 / 2**20)
    assert regular == 17 * 3**4
    assert det_bounds(5)[1] is None


def test_mc_reproducible_bytes(capsys):
    argv = ["mc", "--what", "cycle", "--d", "2", "--sigma", "2", "--r", "0.2", "--q", "4",
            "--samples", "200000", "--seed", "99"]
    first = call(capsys, *argv)[1]
    again = call(capsys, *argv, "--threads", "3")[1]
    assert first == again


def test_seed_env_fallback(capsys, monkeypatch):
    argv = ["mc", "--what", "cycle", "--d", "1", "--r", "0.2", "--q", "3", "--samples", "5000"]
    monkeypatch.setenv("TORUS_CYCLES_SEED", "31")
    a = call(capsys, *argv)[1]
    b = call(capsys, *argv, "--seed", "31")[1]
    assert a == b


def test_out_file(capsys, tmp_path):
    path = tmp_path / "psi.csv"
    code, out, _ = call(capsys, "psi", "--d", "3", "--k-max", "3", "--out", str(path))
    assert code == 0 and out == ""
    assert path.read_text() == "k,count\n0,1\n1,6\n2,12\n3,8\n"


def test_plot_figure_threshold(capsys, tmp_path):
    svg = tmp_path / "fig.svg"
    code, out, _ = call(capsys, "plot", "--figure", "1", "--n-min", "5", "--n-max", "8",
                        "--plot", str(svg))
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["n", "threshold_er", "threshold_gr"]
    assert all(gr < er for _, er, gr in rows)
    text = svg.read_text()
    assert "GR d=2 sigma=2" in text and "ER" in text


def test_plot_figure_sweep(capsys, tmp_path):
    svg = tmp_path / "fig3.svg"
    code, out, _ = call(capsys, "plot", "--figure", "3", "--points", "21", "--plot", str(svg))
    assert code == 0
    _, rows = read_csv(out)
    assert len(rows) == 21
    assert all(er >= 0 and gr >= 0 for _, er, gr in rows)


def test_selftest(capsys):
    code, out, _ = call(capsys, "selftest", "--samples", "50000")
    assert code == 0
    assert "FAIL" not in out


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "torus_cycles", "psi", "--d", "1", "--k-max", "4"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout == "k,count\n0,1\n1,2\n2,0\n3,0\n4,2\n"


# ---------------------------------------------------------------- output helpers

@pytest.mark.parametrize("value,text", [
    (0.03, "0.03"),
    (0.1 + 0.2, "0.30000000000000004"),
    (5, "5"),
    (True, "true"),
    (None, ""),
    (Fraction(6, 3), "2"),
    (math.inf, "inf"),
])
def test_format_value(value, text):
    assert format_value(value) == text


def test_emit_csv_header_only_and_roundtrip():
    assert emit_csv([], ["n", "threshold_er", "threshold_gr"]) == "n,threshold_er,threshold_gr\n"
    rows = [[20, 0.14481, 0.14455671686463728], [3, 1.0, None]]
    text = emit_csv(rows, ["n", "threshold_er", "threshold_gr"])
    assert text.count("\n") == 3 and "\r" not in text
    header, back = read_csv(text)
    assert back == rows


def test_emit_csv_rejects_ragged_rows():
    with pytest.raises(ValueError):
        emit_csv([[1, 2]], ["a"])


def test_emit_svg_valid_and_labelled():
    text = emit_svg([Series("ER", [3, 4, 5], [1.0, 0.7, 0.6]),
                     Series("GR d=2 sigma=2", [3, 4, 5], [0.9, 0.69, 0.59])],
                    Axes("thresholds", "n", "p"))
    root = ET.fromstring(text.encode())
    assert root.tag.endswith("svg") and root.get("version") == "1.1"
    assert "GR d=2 sigma=2" in text and "thresholds" in text


def test_emit_svg_constant_series_and_log_axis():
    ET.fromstring(emit_svg([Series("flat", [0, 1, 2], [2.0, 2.0, 2.0])]).encode())
    text = emit_svg([Series("per", [0.0, 0.5, 1.0], [0.0, 1e3, 1e12])], Axes(logy=True))
    assert "1e+12" in text


def test_emit_svg_errors():
    with pytest.raises(ValueError):
        emit_svg([])
    with pytest.raises(ValueError):
        emit_svg([Series("one", [1.0], [1.0])])
