import json

import pytest

from nestder.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_small_campaign(capsys):
    code, out, _ = run(capsys, "verify", "--nest", "1,2", "--trials", "100", "--seed", "7")
    assert code == 0
    assert out.startswith("verify: 100/100 feasible round trips")


def test_verify_gaussian_single_trial(capsys):
    code, out, _ = run(capsys, "verify", "--nest", "2", "--trials", "1", "--seed", "1", "--field", "gaussian")
    assert code == 0 and "1/1 feasible" in out


@pytest.mark.parametrize("argv", [
    ["verify", "--trials", "0"],
    ["verify", "--nest", "3,2"],
    ["verify", "--checks", "bogus"],
    ["corollaries", "--checks", ""],
    ["corollaries", "--checks", "no_such"],
    ["verify", "--field", "real"],
    [],
])
def test_input_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_json_report_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "verify", "--nest", "1,3", "--trials", "3", "--seed", "5", "--out", str(a))
    run(capsys, "verify", "--nest", "1,3", "--trials", "3", "--seed", "5", "--out", str(b))
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    assert ra["body"] == rb["body"] and ra["body_sha256"] == rb["body_sha256"]
    assert ra["body"]["config"] == {"nest": [1, 3], "field": "rational", "trials": 3, "seed": 5,
                                    "checks": ["theorem", "steps"]}
    for rec in ra["body"]["trials"]:
        assert "certificate" in rec
        if rec["malformed"]["verdict"] == "refuted":
            assert "witness" in rec["malformed"]


def test_workers_match_serial(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "verify", "--nest", "1,2", "--trials", "4", "--out", str(a))
    run(capsys, "verify", "--nest", "1,2", "--trials", "4", "--workers", "2", "--out", str(b))
    assert json.loads(a.read_text())["body"] == json.loads(b.read_text())["body"]


def test_corollaries_command(capsys):
    code, out, _ = run(capsys, "corollaries", "--nest", "1,2", "--trials", "3",
                       "--checks", "right_centralizer,local_derivation", "--json")
    assert code == 0
    body = json.loads(out)["body"]
    assert set(body["summary"]) == {"right_centralizer", "local_derivation"}
    assert body["summary"]["right_centralizer"]["misclassified"] == 0


def test_counterexample_command(capsys):
    code, out, _ = run(capsys, "counterexample", "--json")
    assert code == 0
    body = json.loads(out)["body"]
    assert body["infeasibility_certificate"]["rank_gap"] == 1
    assert body["zero_product_check"]["verdict"] == "holds"
    assert set(body["structure_constants"]) >= {"U*I", "V*W"}
    code2, out2, _ = run(capsys, "counterexample", "--json")
    assert json.loads(out2)["body_sha256"] == json.loads(out)["body_sha256"]


def test_solve_command(capsys, tmp_path):
    d, t = tmp_path / "d.txt", tmp_path / "t.txt"
    # delta = R_{E12}, tau = L_{E12} on the 2x2 upper triangular algebra (basis E11, E12, E22)
    # column k is the image of unit k: R_{E12} sends E11 to E12, L_{E12} sends E22 to E12
    d.write_text("0 0 0\n1 0 0\n0 0 0\n")
    t.write_text("0 0 0\n0 0 1\n0 0 0\n")
    code, out, _ = run(capsys, "solve", "--nest", "1,2", "--input", str(d), str(t), "--json")
    assert code == 0
    rep = json.loads(out)["body"]["report"]
    assert rep["verdict"] == "refuted"
    assert rep["counter_witness"]["A"]["coords"] == ["1", "0", "0"]
    code, _, err = run(capsys, "solve", "--nest", "1,2", "--input", str(d), str(tmp_path / "missing"))
    assert code == 2 and "cannot read" in err
    d.write_text("1 0\n0 1\n")
    code, _, _ = run(capsys, "solve", "--nest", "1,2", "--input", str(d), str(t))
    assert code == 2


def test_theorem_violation_writes_bundle(capsys, tmp_path, monkeypatch):
    from nestder import campaign
    from nestder.errors import TheoremViolation

    def boom(cfg, workers=1):
        raise TheoremViolation("synthetic", {"seed": cfg.seed})

    monkeypatch.setattr(campaign, "cmd_verify", boom)
    out = tmp_path / "r.json"
    code, _, err = run(capsys, "verify", "--seed", "3", "--out", str(out))
    assert code == 3
    bundle = json.loads((tmp_path / "r.json.repro.json").read_text())
    assert bundle == {"error": "synthetic", "bundle": {"seed": 3}}
