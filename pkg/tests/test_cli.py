import json

import numpy as np
import pytest

from specmeas import cli, measure, serialize
from specmeas.harness import Caps


def run(capsys, *argv):
    code = cli.run_cli(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_no_args_usage_exit_2(capsys):
    code, _, err = run(capsys)
    assert code == 2


def test_verify_b_single_scenario(capsys):
    code, out, _ = run(capsys, "verify-b", "--seed", "7", "--count", "1")
    assert code == 0
    lines = [ln for ln in out.splitlines() if ln.strip()]
    assert len(lines) == 1
    doc = json.loads(lines[0])
    assert doc["pass"] is True
    assert doc["scenario"] == "B-7"
    assert doc["wall_ms"] == 0


def test_verify_deterministic_output(capsys):
    code1, out1, _ = run(capsys, "verify-a", "--seed", "3", "--count", "4")
    code2, out2, _ = run(capsys, "verify-a", "--seed", "3", "--count", "4")
    assert code1 == code2 == 0
    assert out1 == out2


def test_env_seed_default(capsys, monkeypatch):
    monkeypatch.setenv("SPECREP_SEED", "11")
    code, out, _ = run(capsys, "verify-a")
    assert code == 0
    assert json.loads(out.splitlines()[0])["scenario"] == "A-11"


def test_caps_parsing():
    caps = cli.parse_caps("h=2,k=8,x=4,n=16")
    assert caps == Caps(h_dim=2, k_dim=8, space=4, horizon=16)
    with pytest.raises(Exception):
        cli.parse_caps("h=9")
    with pytest.raises(Exception):
        cli.parse_caps("zz=2")


def test_check_measure_good_and_bad(capsys, tmp_path):
    space = measure.DiscreteSpace(labels=(0, 1))
    e = measure.SpectralMeasure(
        space=space,
        atoms={0: np.diag([1.0, 0.0]).astype(complex),
               1: np.diag([0.0, 1.0]).astype(complex)},
    )
    good = tmp_path / "good.json"
    serialize.dump(serialize.measure_to_doc(e), good)
    code, _, _ = run(capsys, "check-measure", str(good))
    assert code == 0
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    code, out, err = run(capsys, "check-measure", str(bad))
    assert code == 1
    assert "document[InvalidDocument]" in err


def test_report_json_and_text(capsys, tmp_path):
    out_json = tmp_path / "agg.json"
    code, _, _ = run(capsys, "report", "--out", str(out_json),
                     "--kinds", "a", "--seed", "1", "--count", "2")
    assert code == 0
    doc = json.loads(out_json.read_text())
    assert doc["pass"] is True and len(doc["reports"]) == 2
    out_text = tmp_path / "agg.txt"
    code, _, _ = run(capsys, "report", "--out", str(out_text),
                     "--format", "text", "--kinds", "c", "--seed", "1",
                     "--count", "1")
    assert code == 0
    assert "0 failed" in out_text.read_text()


def test_report_byte_identical(capsys, tmp_path):
    p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
    for p in (p1, p2):
        code, _, _ = run(capsys, "report", "--out", str(p),
                         "--kinds", "a,b,c,d", "--seed", "5", "--count", "2")
        assert code == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_fuzz_smoke(capsys):
    code, out, _ = run(capsys, "fuzz", "--kinds", "a", "--seconds", "0.2",
                       "--seed", "0")
    assert code == 0
    assert "fuzz:" in out


def test_fuzz_rejects_unknown_kind(capsys):
    code, _, err = run(capsys, "fuzz", "--kinds", "q", "--seconds", "0.1")
    assert code == 2
    assert "unknown kind" in err
