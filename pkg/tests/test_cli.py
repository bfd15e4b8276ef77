import json

import pytest

from abzeta.catalog import get_family
from abzeta.cli import EXIT_BUDGET, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == EXIT_OK
    assert len(out.strip().splitlines()) == 23
    assert "Q=p6 H" in out and "6*q+2" in out and "epsilon=5" in out


def test_list_unknown_filter(capsys):
    code, out, _ = run(capsys, "list", "nothing-like-this")
    assert code == EXIT_OK
    assert "(no rows)" in out


def test_verify_g2(capsys):
    code, out, _ = run(capsys, "verify", "-f", "G2", "--primes", "2,3,5", "--m", "3",
                       "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert {c["result"] for c in doc["cells"]} == {"equal"}
    assert len(doc["cells"]) == 6


def test_verify_skips_over_budget(capsys):
    code, out, _ = run(capsys, "verify", "-f", "p2gg", "--param", "q=1", "--primes", "3",
                       "--m", "6", "--mode", "full", "--work-limit", "1000", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["cells"][0]["result"] == "skipped"


def test_verify_corrupted_catalog(capsys, monkeypatch):
    fam = get_family("G2")
    local = [dict(b) for b in fam.local]
    for b in local:
        if b["guard"] != "p == 2":
            b["formula"] = "Z(1,0)*Z(1,-1)*Z(1,-1)"
    monkeypatch.setattr(fam, "local", local)
    code, out, _ = run(capsys, "verify", "-f", "G2", "--primes", "3", "--m", "2",
                       "--mode", "full")
    assert code == EXIT_MISMATCH
    assert "MISMATCH" in out


def test_funceq(capsys):
    code, out, _ = run(capsys, "funceq", "-f", "G4", "--p-max", "50")
    assert code == EXIT_OK
    code, out, _ = run(capsys, "funceq", "-f", "p3E", "--param", "q=1")
    assert code == EXIT_MISMATCH
    assert "5 " in out or " 5" in out


def test_coeffs(capsys, tmp_path):
    code, out, _ = run(capsys, "coeffs", "N", "--param", "k=0", "--N", "4")
    assert (code, out.strip()) == (EXIT_OK, "1 7 13 35")
    code, out, _ = run(capsys, "coeffs", "G2", "--p", "2", "--m", "2", "--source", "oracle-full")
    assert out.strip() == "1 6 28"
    dest = tmp_path / "g.csv"
    code, _, _ = run(capsys, "coeffs", "G6", "--N", "6", "--format", "csv", "-o", str(dest))
    assert code == EXIT_OK
    assert dest.read_text().splitlines()[:3] == ["n,a_n", "1,1", "2,0"]
    code, out, _ = run(capsys, "coeffs", "N", "--param", "k=0", "--N", "3", "--partial-sums")
    assert out.splitlines() == ["1 1", "2 8", "3 21"]


@pytest.mark.parametrize(
    "argv",
    [
        ["coeffs", "G2"],
        ["coeffs", "G2", "--N", "5", "--p", "2"],
        ["coeffs", "G2", "--p", "2"],
        ["coeffs", "G2", "--N", "5", "--source", "oracle-full"],
        ["coeffs", "p2", "--param", "q=zero", "--N", "5"],
        ["coeffs", "p3G", "--param", "r=3", "--N", "5"],
        ["coeffs", "G9", "--N", "5"],
        ["verify", "--bogus"],
        ["list", "--format", "yaml"],
        ["coeffs", "G2", "--p", "4", "--m", "1"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_budget_exit(capsys):
    code, _, err = run(capsys, "coeffs", "p2gg", "--p", "3", "--m", "6", "--source",
                       "oracle-full", "--work-limit", "1000")
    assert code == EXIT_BUDGET
    assert "work limit" in err


def test_dump_catalog(capsys):
    code, out, _ = run(capsys, "dump-catalog", "--format", "json")
    assert code == EXIT_OK
    assert len(json.loads(out)["families"]) == 22
    code, out, _ = run(capsys, "dump-catalog", "--errata")
    assert "pg: global:" in out
    assert "B2: local" in out


def test_audit(capsys):
    code, out, _ = run(capsys, "audit", "G3", "--p", "7", "--trials", "100")
    assert code == EXIT_OK and "0 violations" in out
    code, out, _ = run(capsys, "audit", "G4", "--p", "3", "--trials", "100", "--broken")
    assert code == EXIT_OK and " 0 violations" not in out
    code, out, _ = run(capsys, "audit", "G2", "--p", "3", "--witnesses", "1", "--format", "json")
    assert len(json.loads(out)["witnesses"]) == 14


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("format = json\nq = 1\n")
    code, out, _ = run(capsys, "funceq", "-f", "p2", "--config", str(cfg))
    assert code == EXIT_OK
    assert len(json.loads(out)["checks"]) == 1
    cfg.write_text("format = yaml\n")
    assert run(capsys, "list", "--config", str(cfg))[0] == EXIT_USAGE
