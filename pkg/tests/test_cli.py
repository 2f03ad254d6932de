import csv
import json

import pytest

from qes.bdengine import BDFamily
from qes.cli import main
from qes.spectra import QESSpectrum

C_I = ["--family", "complex-dshg", "--branch", "i"]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spectrum_example(tmp_path, capsys):
    out = tmp_path / "spec.json"
    code, _, _ = run(["spectrum", *C_I, "--a", "1", "--l", "-0.5", "--M", "2",
                      "--out", str(out)], capsys)
    assert code == 0
    sp = QESSpectrum.from_dict(json.loads(out.read_text()))
    assert sp.energies == [2]


def test_missing_M_is_usage_error(capsys):
    code, _, err = run(["spectrum", *C_I, "--a", "1", "--l", "-0.5"], capsys)
    assert code == 1 and "usage" in err and "--M" in err


def test_unsatisfied_condition_exit_2(capsys):
    code, _, err = run(["spectrum", *C_I, "--a", "1", "--l", "-0.5", "--M", "3"], capsys)
    assert code == 2 and "nearest valid M = 4" in err


def test_bad_flag_exit_1(capsys):
    assert run(["spectrum", "--family", "quartic"], capsys)[0] == 1
    assert run(["nonsense"], capsys)[0] == 1


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"family": "complex-dshg", "a": "1", "l": "-1/2", "M": "3"}))
    code, _, _ = run(["spectrum", "--config", str(cfg)], capsys)
    assert code == 2
    code, out, _ = run(["spectrum", "--config", str(cfg), "--M", "2"], capsys)
    assert code == 0 and json.loads(out)["levels"][0]["E"] == [2.0, 0.0]
    cfg.write_text(json.dumps({"a": "1", "colour": "red"}))
    code, _, err = run(["spectrum", "--config", str(cfg)], capsys)
    assert code == 1 and "colour" in err


def test_spectrum_csv(capsys):
    code, out, _ = run(["spectrum", *C_I, "--a", "2", "--l", "-0.25", "--M", "4.5",
                        "--format", "csv"], capsys)
    rows = list(csv.reader(out.splitlines()))
    assert code == 0 and rows[0][:4] == ["index", "E_re", "E_im", "class"]
    assert [r[3] for r in rows[1:]] == ["ComplexConjugatePair"] * 2


def test_bd_roundtrip(capsys):
    code, out, _ = run(["bd", *C_I, "--a", "0.5", "--l", "-0.25", "--M", "4.5",
                        "--n-max", "6"], capsys)
    fam = BDFamily.from_dict(json.loads(out))
    assert code == 0 and len(fam.polynomials) == 7 and fam.critical_index == 2


def test_verify_real_and_complex(capsys):
    code, out, _ = run(["verify", "--family", "real-v1", "--a", "1", "--l", "-0.5",
                        "--M", "1.5"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["fd"]["matches"][0]["E_qes"] == 4.0
    assert doc["levels"][0]["residual"]["max_residual"] < 1e-7
    code, out, _ = run(["verify", *C_I, "--a", "1", "--l", "-0.5", "--M", "2"], capsys)
    assert [w["decays"] for w in json.loads(out)["wedge"]] == [True, False, False, True]


def test_antiiso(capsys):
    code, out, _ = run(["antiiso", *C_I, "--a", "0.5", "--l", "-0.25", "--M", "4.5"], capsys)
    doc = json.loads(out)
    src = QESSpectrum.from_dict(doc["source"]).energies
    tgt = QESSpectrum.from_dict(doc["target"]).energies
    assert tgt == [-src[1], -src[0]] and max(doc["target_residuals"]) < 1e-7
    assert run(["antiiso", "--family", "real-v1", "--a", "1", "--l", "-0.5", "--M", "1.5"],
               capsys)[0] == 1


def test_sl2_example(capsys):
    code, out, _ = run(["sl2", "--n", "1", "--a", "1", "--l", "-0.5"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["report"]["verdict"] in ("Match", "Mismatch")
    assert doc["model"]["M"] == "4"


def test_reconcile_table(capsys):
    code, out, _ = run(["reconcile", *C_I, "--a", "0.5", "--l", "-0.25", "--M", "4.5",
                        "--format", "table"], capsys)
    assert code == 0 and "weights:complex-dshg/i/p=2" in out


def sweep(capsys, monkeypatch, threads):
    monkeypatch.setenv("QES_THREADS", str(threads))
    code, out, _ = run(["sweep", "--param", "a", "--from", "0.1", "--to", "2.0", "--steps", "20",
                        *C_I, "--l", "-0.25", "--M", "4.5"], capsys)
    assert code == 0
    return out


def test_sweep_rows_and_order(capsys, monkeypatch):
    serial = sweep(capsys, monkeypatch, 1)
    parallel = sweep(capsys, monkeypatch, 4)
    assert serial == parallel
    rows = list(csv.DictReader(serial.splitlines()))
    assert len(rows) == 20
    assert [r["a"] for r in rows][:3] == ["0.1", "0.2", "0.3"]
    classes = [r["classes"].split(";")[0] for r in rows]
    assert classes[11] == "Real" and classes[12] == "ComplexConjugatePair"


@pytest.mark.parametrize("argv", [
    ["sweep", "--param", "a", "--from", "0.1", "--to", "2", "--steps", "1"],
    ["sweep", "--param", "l", "--from", "-0.5", "--to", "0.5", "--steps", "3"],
    ["sweep", "--param", "a", "--to", "2", "--steps", "3"],
])
def test_sweep_usage_errors(argv, capsys):
    assert run([*argv, *C_I, "--a", "1", "--l", "-0.25", "--M", "4.5"], capsys)[0] == 1


def test_sweep_marks_non_qes_points(capsys):
    code, out, _ = run(["sweep", "--param", "M", "--from", "4", "--to", "5", "--steps", "3",
                        *C_I, "--a", "0.5", "--l", "-0.25"], capsys)
    rows = list(csv.DictReader(out.splitlines()))
    assert [r["status"] for r in rows] == ["no-qes", "ok", "no-qes"]
