from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

import pytest

from afptas.cli import RUN_FIELDS, main

TINY = {"problem": "bpcc", "k": 2, "epsilon": "1/2", "items": [{"size": s} for s in ["0.6"] * 3 + ["0.4"] * 3]}


@pytest.fixture
def tiny(tmp_path):
    p = tmp_path / "tiny.json"
    p.write_text(json.dumps(TINY))
    return p


def test_generate_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["generate", "--problem", "bpcc", "--n", "6", "--k", "2", "--seed", "7", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_generate_bpr_penalties_in_range(tmp_path):
    out = tmp_path / "r.json"
    assert main(["generate", "--problem", "bpr", "--n", "30", "--seed", "1", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert all(0 < Fraction(it["penalty"]) <= 1 for it in data["items"])


def test_generate_rejects_empty(capsys):
    assert main(["generate", "--problem", "bpcc", "--n", "0", "--k", "2"]) == 2


def test_bad_flags_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["solve"])
    assert info.value.code == 2


def test_solve_then_verify(tiny, tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["solve", "--in", str(tiny), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["case"] == "BPCC_SMALL_K"
    assert main(["verify", "--packing", str(out), "--in", str(tiny)]) == 0
    assert "ok" in capsys.readouterr().out


def test_solve_csv(tiny, capsys):
    assert main(["solve", "--in", str(tiny), "--format", "csv"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert list(rows[0]) == RUN_FIELDS
    assert rows[0]["algorithm"] == "afptas"


def test_verify_catches_duplicates(tiny, tmp_path, capsys):
    out = tmp_path / "report.json"
    main(["solve", "--in", str(tiny), "--out", str(out)])
    data = json.loads(out.read_text())["packing"]
    data["bins"][0].append(data["bins"][1][0])
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    assert main(["verify", "--packing", str(bad), "--in", str(tiny)]) == 1
    assert "appears 2 times" in capsys.readouterr().out


def test_compare_with_exact_respects_guarantee(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for seed in range(4):
        args = ["generate", "--n", "8", "--seed", str(seed), "--size-dist", "clustered", "--out", str(corpus / f"i{seed}.json")]
        problem = ["--problem", "bpcc", "--k", "3"] if seed % 2 == 0 else ["--problem", "bpr"]
        assert main(args + problem) == 0
    out = tmp_path / "runs.csv"
    assert main(["compare", "--in", str(corpus), "--with", "exact,ffd", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert {r["algorithm"] for r in rows} == {"afptas", "exact", "ffd"}
    for r in rows:
        if r["algorithm"] == "afptas":
            bound = Fraction(r["guarantee_mult"]) * Fraction(r["opt_exact"]) + Fraction(r["guarantee_add"])
            assert Fraction(r["cost"]) <= bound


def test_bad_input_exits_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"problem": "bpcc", "k": 2, "items": [{"size": "1.5"}]}))
    assert main(["solve", "--in", str(p)]) == 2


def test_epsilon_warning(tiny, capsys):
    assert main(["solve", "--in", str(tiny), "--epsilon", "0.3", "--format", "csv"]) == 0
    assert "adjusted to 1/4" in capsys.readouterr().err


def test_unknown_compare_algorithm(tiny):
    assert main(["compare", "--in", str(tiny), "--with", "magic"]) == 2
