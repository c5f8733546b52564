import csv
import io
import json

import pytest

from nckdv import parse
from nckdv.cli import RunConfig, main

SCHEMA = {"claim": str, "paper_ref": str, "status": str, "residual": (float, int, type(None)),
          "witness": (str, type(None)), "trials": (int, type(None)),
          "points": (int, type(None)), "tolerance": (float, type(None))}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def usage_exit(capsys, *argv):
    with pytest.raises(SystemExit) as info:
        main(list(argv))
    err = capsys.readouterr().err
    return info.value.code, err


def test_defaults():
    cfg = RunConfig("verify")
    assert (cfg.dim, cfg.seed, cfg.N, cfg.points, cfg.tol, cfg.format) == (2, 1, 2, 10, 1e-8, "text")


def test_verify_all_json(capsys):
    code, out, _ = run(capsys, "verify", "--claims", "all", "--format", "json")
    records = json.loads(out)
    assert code == 0 and isinstance(records, list) and records
    for rec in records:
        assert set(rec) == set(SCHEMA)
        for key, types in SCHEMA.items():
            assert isinstance(rec[key], types), key
        assert rec["status"] == "pass"
    claims = [r["claim"] for r in records]
    assert "thm1a" in claims and "soliton_meta" in claims and "hier_soliton_E3" in claims


def test_verify_single_claim(capsys):
    code, out, _ = run(capsys, "verify", "--claims", "thm1a", "--format", "json")
    assert code == 0 and [r["claim"] for r in json.loads(out)] == ["thm1a"]


def test_verify_unknown_claim(capsys):
    code, err = usage_exit(capsys, "verify", "--claims", "nosuch")
    assert code == 2 and "unknown claim" in err


def test_mutation_flips_exit_code(capsys):
    assert run(capsys, "verify", "--claims", "thm1a")[0] == 0
    code, out, _ = run(capsys, "verify", "--claims", "thm1a,soliton_meta", "--mutate", "meta")
    assert code == 1 and "FAIL" in out


def test_hierarchy(capsys):
    code, out, _ = run(capsys, "hierarchy", "--eq", "meta", "--n", "2")
    assert code == 0 and parse(out.strip()) == parse("Q_xxx - 3*Q_xx*inv(Q)*Q_x")
    assert run(capsys, "hierarchy", "--eq", "meta", "--n", "1")[1].strip() == "Q_x"
    code, out, _ = run(capsys, "hierarchy", "--eq", "mkdv", "--n", "3")
    assert parse(out.strip()).max_order() == 5
    assert usage_exit(capsys, "hierarchy", "--eq", "meta", "--n", "0")[0] == 2


def test_soliton_csv(capsys):
    code, out, err = run(capsys, "soliton", "--dim", "2", "--seed", "7", "--n", "2", "--points", "10")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 10
    assert "PASS" in err


def test_soliton_scalar_hand_value(capsys, tmp_path):
    path = tmp_path / "s.csv"
    code, out, _ = run(capsys, "soliton", "--dim", "1", "--seed", "3", "--A", "1", "--B", "-2",
                       "--point", "0.6931471805599453,0", "--csv", str(path))
    rows = list(csv.DictReader(path.open()))
    assert code == 0 and len(rows) == 1
    assert float(rows[0]["value_Q"]) == pytest.approx(-0.6, abs=1e-14)
    assert float(rows[0]["value_L"]) == pytest.approx(-4.0, abs=1e-14)
    assert "soliton_meta" in out


def test_soliton_scalar_random_run(capsys):
    code, out, _ = run(capsys, "soliton", "--dim", "1", "--seed", "3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and "value_Q" in rows[0]


def test_soliton_usage_errors(capsys):
    assert usage_exit(capsys, "soliton", "--points", "0")[0] == 2
    assert usage_exit(capsys, "soliton", "--A", "1")[0] == 2
    assert usage_exit(capsys, "soliton", "--dim", "1", "--A", "1", "--B", "1",
                      "--point", "0,0")[0] == 2


def test_soliton_json_and_mutation(capsys, tmp_path):
    code, out, _ = run(capsys, "soliton", "--format", "json", "--csv", str(tmp_path / "x.csv"),
                       "--mutate", "meta")
    records = {r["claim"]: r for r in json.loads(out)}
    assert code == 1
    assert records["soliton_meta"]["status"] == "fail"
    assert records["soliton_meta"]["residual"] > 1e-2


def test_eval(capsys):
    assert run(capsys, "eval", "V_x", "--subst", "V=Q_x*inv(Q)")[1].strip() == \
        "-Q_x*inv(Q)*Q_x*inv(Q) + Q_xx*inv(Q)"
    assert run(capsys, "eval", "{V, V_x}", "--integrate")[1].strip() == "V*V"
    assert run(capsys, "eval", "Q_x*inv(Q)", "--tex")[1].strip() == "Q_{x}Q^{-1}"
    assert run(capsys, "eval", "q*q_x*inv(q)", "--commutative")[1].strip() == "q_x"
    code, _, err = run(capsys, "eval", "V*V_x", "--integrate")
    assert code == 1 and "not the x-derivative" in err
    assert usage_exit(capsys, "eval", "Q *")[0] == 2
