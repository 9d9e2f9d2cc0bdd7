import csv
import io
import subprocess
import sys

import pytest

from mtlab.cli import main, parse_range


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_constants(capsys):
    code, out, _ = run(capsys, "--experiment", "constants")
    assert code == 0
    assert rows(out)[1] == ["2", "6.28318530717959", "12.5663706143592"]


def test_strip_bound(capsys):
    code, out, _ = run(capsys, "--experiment", "strip-bound", "--k", "2")
    assert code == 0
    r = rows(out)
    assert r[0] == ["k", "jensen", "vanishing", "status"]
    assert float(r[1][1]) == pytest.approx(5.31295151579471, rel=1e-14)
    assert r[1][3] == "PASS"


def test_strip_bound_failure_exit(capsys):
    # k = 1 sits below the vanishing level, so the check fails
    code, out, _ = run(capsys, "--experiment", "strip-bound", "--k", "1")
    assert code == 1
    assert rows(out)[1][3] == "FAIL"


def test_moser_energies(capsys):
    code, out, _ = run(capsys, "--experiment", "moser", "--k-range", "1..5")
    assert code == 0
    body = rows(out)[1:]
    assert len(body) == 5
    assert all(float(r[2]) == pytest.approx(1.0, abs=1e-12) for r in body)


def test_unknown_experiment(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--experiment", "nope"])
    assert e.value.code == 2


def test_missing_experiment(capsys):
    code, _, err = run(capsys)
    assert code == 2 and "experiment" in err


def test_bad_values(capsys):
    assert run(capsys, "--experiment", "moser", "--grid", "12by3")[0] == 2
    assert run(capsys, "--experiment", "moser", "--k-range", "a..b")[0] == 2
    assert run(capsys, "--experiment", "moser", "--alpha", "-1")[0] == 2
    assert run(capsys, "--experiment", "constants", "--N", "x")[0] == 2


def test_unwritable_out(capsys, tmp_path):
    code, _, _ = run(capsys, "--experiment", "constants", "--out", str(tmp_path / "no" / "x.csv"))
    assert code == 2


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# strip bound\nexperiment = strip-bound\nk = 5\n")
    code, out, _ = run(capsys, "--config", str(cfg))
    assert code == 0 and rows(out)[1][0] == "5"
    code, out, _ = run(capsys, "--config", str(cfg), "--k", "10")
    assert code == 0 and rows(out)[1][0] == "10"


def test_config_errors(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run(capsys, "--config", str(bad))[0] == 2
    assert run(capsys, "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_out_file_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "--experiment", "metric", "--out", str(a))[0] == 0
    assert run(capsys, "--experiment", "metric", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().count(b"\r") == 0


@pytest.mark.parametrize("text", ["1..6", "1:6", "1-6"])
def test_parse_range(text):
    assert parse_range(text) == (1, 6)


def test_module_entry():
    r = subprocess.run([sys.executable, "-m", "mtlab.cli", "--experiment", "constants"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.splitlines()[0] == "N,omega,alpha"
