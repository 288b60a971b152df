import io
import json
import subprocess
import sys

import pytest

from qforms.cli import DEFAULTS, RunConfig, UsageError, run


def _run(argv, monkeypatch=None):
    out = io.StringIO()
    code = run(argv, stdout=out)
    return code, out.getvalue()


def test_filtration_example():
    code, text = _run(["filtration", "--b-plus", "(T-1)", "--b-minus", "(T-1)^2"])
    assert code == 0
    (item,) = json.loads(text)["items"]
    assert item["case"] == "b"
    assert item["type"] == [1, 2, 4]


def test_filtration_random_is_deterministic():
    a = _run(["filtration", "--count", "20", "--seed", "7"])
    b = _run(["filtration", "--count", "20", "--seed", "7"])
    c = _run(["filtration", "--count", "20", "--seed", "8"])
    assert a == b
    assert a[0] == 0
    assert a[1] != c[1]


def test_usage_errors_exit_two():
    assert _run(["filtration", "--b-plus", "(T-1)"])[0] == 2
    assert _run(["filtration", "--b-plus", "1/(T-1)", "--b-minus", "1"])[0] == 2
    assert _run(["qcheck", "--series-order", "1"])[0] == 2
    assert _run(["decompose"])[0] == 2
    assert _run(["nonsense"])[0] == 2
    assert _run(["filtration", "--b-plus", "T+(", "--b-minus", "1"])[0] == 2


def test_identity_failure_exits_one():
    code, text = _run(["gamma", "--m-max", "1"])
    report = json.loads(text)
    assert code == 1
    assert report["passed"] is False
    assert report["failures"]


def test_config_validation():
    with pytest.raises(UsageError):
        RunConfig("qcheck", -1, 0, 0, 2).validate()
    with pytest.raises(UsageError):
        RunConfig("qcheck", 0, 0, 0, 2, output="xml").validate()
    assert set(DEFAULTS) >= {"qcheck", "cg", "gram", "sharp-verify", "cgid", "filtration",
                             "diagonalize", "rank2-sl3", "rank2-sp4"}


def test_small_sweeps_pass():
    assert _run(["qcheck", "--m-max", "2", "--n-max", "3", "--depth", "2", "--series-order", "3"])[0] == 0
    assert _run(["cgid", "--m-max", "3", "--n-max", "3"])[0] == 0
    assert _run(["cg", "--m-max", "2", "--n-max", "2"])[0] == 0
    assert _run(["sharp-verify", "--m-max", "1", "--n-max", "1", "--depth", "1"])[0] == 0
    assert _run(["gram", "--m-max", "1", "--n-max", "1", "--depth", "2"])[0] == 0
    assert _run(["rank2-sl3"])[0] == 0
    assert _run(["rank2-sp4"])[0] == 0
    assert _run(["decompose", "--finite", "0,1,2", "--sharp-sign", "1"])[0] == 0


def test_diagonalize_matrix_file(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps([["0", "T-1"], ["T-1", "(T-1)^2"]]))
    code, text = _run(["diagonalize", "--matrix-file", str(path)])
    assert code == 0
    assert json.loads(text)["items"][0]["exponents"] == [1, 1]
    assert _run(["diagonalize", "--matrix-file", str(tmp_path / "missing.json")])[0] == 2


def test_diagonalize_random_symmetric():
    code, text = _run(["diagonalize", "--count", "5", "--symmetric"])
    assert code == 0
    assert all(it["units_valid"] for it in json.loads(text)["items"])


def test_csv_output_and_file(tmp_path):
    target = tmp_path / "out.csv"
    code, text = _run(["filtration", "--b-plus", "1", "--b-minus", "(T-1)^2", "--output", "csv",
                       "--output-path", str(target)])
    assert code == 0 and text == ""
    lines = target.read_text().splitlines()
    assert lines[0] == "path,value"
    assert "items[0].case,b" in lines
    assert "passed,true" in lines


def test_worker_pool_matches_serial(monkeypatch):
    argv = ["cgid", "--m-max", "2", "--n-max", "2"]
    serial = _run(argv)
    monkeypatch.setenv("QFORMS_WORKERS", "3")
    assert _run(argv) == serial
    monkeypatch.setenv("QFORMS_WORKERS", "zero")
    assert _run(argv)[0] == 2


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "qforms.cli", "rank2-sl3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "rank2-sl3"
