import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest
from helpers import example_set, random_set

from uncoreset.cli import main
from uncoreset.io import read_points, write_points


@pytest.fixture
def files(tmp_path):
    P = example_set()
    write_points(P, tmp_path / "P.jsonl")
    write_points(P.subset([1, 3, 5, 7, 9]), tmp_path / "T.jsonl")
    write_points(random_set(np.random.default_rng(0), 400, 3), tmp_path / "big.jsonl")
    write_points(random_set(np.random.default_rng(0), 30, 2, d=3), tmp_path / "d3.csv")
    return tmp_path


def test_build_writes_coreset_and_sidecar(files):
    out = files / "t.jsonl"
    args = ["build", "--kind", "re", "--family", "halfline", "--eps", "0.1",
            "--method", "discrepancy", "--seed", "7", str(files / "big.jsonl"), "-o", str(out)]
    assert main(args) == 0
    meta = json.loads((files / "t.jsonl.meta.json").read_text())
    assert meta["kind"] == "re" and meta["seed"] == 7 and meta["sizes"]["n"] == 400
    T = read_points(out)
    assert T.n == meta["sizes"]["coreset"] <= meta["params"]["g"]
    first = out.read_bytes(), (files / "t.jsonl.meta.json").read_bytes()
    assert main(args) == 0
    assert (out.read_bytes(), (files / "t.jsonl.meta.json").read_bytes()) == first


def test_seed_env_overrides(files, monkeypatch):
    base = ["build", "--eps", "0.2", str(files / "big.jsonl")]
    assert main(base + ["--seed", "3", "-o", str(files / "a.jsonl")]) == 0
    monkeypatch.setenv("UNCORESET_SEED", "3")
    assert main(base + ["--seed", "9", "-o", str(files / "b.jsonl")]) == 0
    assert (files / "a.jsonl").read_bytes() == (files / "b.jsonl").read_bytes()


def test_exit_codes(files, capsys):
    d3 = str(files / "d3.csv")
    assert main(["build", "--family", "rect", "--dim", "3", "--kind", "rc", "--method",
                 "discrepancy", "--eps", "0.2", d3, "-o", str(files / "x.csv")]) == 2
    assert main(["build", "--family", "ball", "--eps", "0.2", d3, "-o", str(files / "x.csv")]) == 2
    assert main(["build", "--eps", "1.5", str(files / "P.jsonl"), "-o", str(files / "x.jsonl")]) == 3
    assert main(["build", "--kind", "rq", "--eps", "0.6", str(files / "P.jsonl"), "-o", str(files / "x.jsonl")]) == 3
    (files / "bad.jsonl").write_text("{not json}\n")
    assert main(["build", "--eps", "0.2", str(files / "bad.jsonl"), "-o", str(files / "x.jsonl")]) == 1
    assert main(["bench", "--eps-list", ""]) == 3
    assert main(["build", "--eps"]) == 1


def test_verify_identity_passes(files, capsys):
    assert main(["verify", str(files / "P.jsonl"), str(files / "P.jsonl"), "--eps", "0.01"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["re"]["re_error"] == "0" and rep["rc"]["rc_error"] == "0" and rep["passed"]


def test_verify_example_report(files):
    out = files / "rep.json"
    code = main(["verify", str(files / "P.jsonl"), str(files / "T.jsonl"), "--eps", "0.05",
                 "--range", "13.5", "--kind", "rq", "--eps-prime", "0.1016", "--alpha", "0.1", "-o", str(out)])
    rep = json.loads(out.read_text())
    # the error at the worked-example range is 1/20; over all half-lines it is 1/10
    assert Fraction(rep["probe"]["re"]["error"]) == Fraction(1, 20)
    assert Fraction(rep["re"]["re_error"]) == Fraction(1, 10)
    assert rep["probe"]["quantization"]["passed"]
    assert code == 4 and not rep["passed"]
    assert [g["i"] for g in rep["variance"]["groups"]] == [0, 1, 2]
    assert out.read_text() == json.dumps(rep, sort_keys=True, indent=2) + "\n"


def test_verify_corrupted_coreset(files, capsys):
    (files / "C.jsonl").write_text('{"id": 99, "locations": [[1], [2]]}\n')
    assert main(["verify", str(files / "P.jsonl"), str(files / "C.jsonl"), "--eps", "0.1"]) == 1
    assert "99" in capsys.readouterr().err


def test_verify_reads_sidecar(files):
    out = files / "t.jsonl"
    assert main(["build", "--eps", "0.2", str(files / "big.jsonl"), "-o", str(out)]) == 0
    assert main(["verify", str(files / "big.jsonl"), str(out), "-o", str(files / "r.json")]) == 0
    assert json.loads((files / "r.json").read_text())["eps"] == 0.2


def test_bench_rows(files, capsys):
    assert main(["bench", str(files / "big.jsonl"), "--eps-list", "0.4,0.2,0.1"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 6
    for method in ("sample", "discrepancy"):
        sizes = [int(r["coreset_size"]) for r in rows if r["method"] == method]
        assert len(sizes) == 3 and sizes == sorted(sizes)
