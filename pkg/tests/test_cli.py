import csv
import io
import json
import math

import pytest

from lieconc import __version__
from lieconc.cli import emit_plot_data, load_plot_data, main, run, to_json
from lieconc.concentration import ConcentrationReport, concentration_sweep
from lieconc.sampling import RandomStream


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_volume_table_29_rows(capsys):
    code, text = run(["volume", "--series", "A", "--n-max", "30"])
    assert code == 0
    r = rows(text)
    assert len(r) == 29
    assert all(x["agree"] == "true" for x in r)
    assert {x["seed"] for x in r} == {"0"} and {x["version"] for x in r} == {__version__}


def test_chi_usp6_record(capsys):
    code, text = run(["chi", "--series", "C", "--n", "3", "--format", "json"])
    assert code == 0
    rec = json.loads(text)[0]
    assert rec["chi"] == pytest.approx(8.0, abs=1e-9)
    assert rec["closed_form"] == 8
    assert rec["spread"] < 1e-8
    assert rec["seed"] == 0


def test_usage_errors_exit_2(capsys):
    assert main(["chi", "--series", "A", "--n", "1"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["cpn", "--not-a-flag", "1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["volume", "--series", "Q"])
    assert exc.value.code == 2


def test_outputs_are_byte_identical(tmp_path, capsys):
    args = ["cpn", "--n", "3,6,12", "--eps", "0.1,0.3", "--trials", "4000", "--seed", "5"]
    _, a = run(args)
    _, b = run(args)
    assert a == b
    _, c = run(args[:-1] + ["6"])
    assert a != c


def test_out_file_and_json_digits(tmp_path, capsys):
    out = tmp_path / "sub" / "s.json"
    assert main(["sobolev", "--n", "1", "--format", "json", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    rec = json.loads(out.read_text())[0]
    assert rec["l2_norm"] == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert "0.70710678118654" in out.read_text()
    assert not list(out.parent.glob("*.tmp"))


def test_to_json_formats():
    assert to_json(0.1) == "0.10000000000000001"
    assert to_json(float("nan")) == "null"
    assert to_json({"a": [1, True, None]}) == '{"a": [1, true, null]}'


def test_plot_data_roundtrip(tmp_path):
    rep = concentration_sweep("cpn", [5, 20, 80], [0.1, 0.2], 2000, RandomStream(1))
    p = emit_plot_data(rep, tmp_path / "plot.csv")
    loaded = load_plot_data(p)
    assert len(loaded) == 3 * 2
    assert loaded == [(e.n, e.epsilon, e.exact_mass, e.mc_mass, e.mc_halfwidth) for e in rep.entries]
    with pytest.raises(ValueError):
        emit_plot_data(ConcentrationReport("cpn", ()), tmp_path / "empty.csv")


def test_other_subcommands(capsys):
    assert main(["ratio", "--series", "D", "--n", "50,100"]) == 0
    assert main(["haar-check", "--group", "SU", "--n", "4", "--samples", "200"]) == 0
    assert main(["circle", "--family", "z", "--n", "5,80"]) == 0
    assert main(["circle", "--family", "y", "--n", "3,4"]) == 0
    assert main(["action", "--preset", "rotation", "--trials", "5000"]) == 0
    assert main(["action", "--preset", "trivial", "--trials", "1000"]) == 0
    assert main(["action", "--preset", "u1", "--weights", "1,2", "--sphere-samples", "2000"]) == 0
    assert main(["hilbert", "--N", "10,100", "--trials", "5000"]) == 0


def test_suite_subset_records_seed(capsys):
    code, text = run(["suite", "--criteria", "2,7,9", "--seed", "42"])
    assert code == 0
    r = rows(text)
    assert [x["criterion"] for x in r] == ["2", "7", "9"]
    assert all(x["passed"] == "true" and x["seed"] == "42" for x in r)
    assert "runtime_ms" not in r[0]


def test_suite_invariant_failure_exits_1(capsys):
    assert main(["suite", "--criteria", "3"]) == 1
    assert main(["suite", "--criteria", "12"]) == 2
