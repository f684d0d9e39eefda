"""CLI behaviour: determinism, formats, exit codes, env overrides."""

import json
import os

import pytest

from selmerlab.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_selmer_subcommand_worked_curve(capsys):
    code, out, _ = run_cli(capsys, "selmer", "--curve=-1505,-712,2216", "--d", "1")
    assert code == 0
    assert "oracles_agree\t1" in out
    assert "dim\t5" in out
    assert "basis\t13\t13" in out or "basis\t13\t39" in out


def test_selmer_usage_error_on_degenerate_curve(capsys):
    code, _, err = run_cli(capsys, "selmer", "--curve", "1,1,2", "--d", "1")
    assert code == 2
    assert "distinct" in err


def test_selmer_budget_exit_code(capsys):
    d = 3 * 5 * 7 * 11 * 13 * 17 * 19 * 23 * 29
    code, _, err = run_cli(capsys, "selmer", "--curve", "0,1,-1", "--d", str(d))
    assert code == 4
    assert "budget" in err


def test_byte_determinism(capsys, tmp_path):
    args = ["census", "--curve", "0,2,7", "--X", "4000", "--seed", "5"]
    p1, p2 = tmp_path / "a.tsv", tmp_path / "b.tsv"
    assert main(args + ["--out", str(p1)]) == 0
    assert main(args + ["--out", str(p2)]) == 0
    capsys.readouterr()
    b1, b2 = p1.read_bytes(), p2.read_bytes()
    assert b1 == b2
    assert b1.startswith(b"# selmerlab")
    assert (tmp_path / "a.tsv.aggregates.json").exists()


def test_census_json_format(capsys):
    code, out, _ = run_cli(capsys, "census", "--curve", "0,2,7", "--X", "4000",
                           "--format", "json")
    assert code == 0
    body = out.split("\n", out.count("#"))[-1]
    payload = json.loads("{" + body.split("{", 1)[1])
    assert "histogram" in payload and "alpha_comparison" in payload


def test_randmat_gamma(capsys):
    code, out, _ = run_cli(capsys, "randmat", "--gamma", "1,3", "--N", "4000",
                           "--seed", "7")
    assert code == 0
    payload = json.loads(out.split("\n# e_used=20\n", 1)[1])
    assert payload["exact_fraction"] == "4/7"
    assert payload["within_3_sigma"] in (True, False)


def test_dist_beta(capsys):
    code, out, _ = run_cli(capsys, "dist", "--beta", "4")
    assert code == 0
    assert "29/1024" in out


def test_pell_single(capsys):
    code, out, _ = run_cli(capsys, "pell", "--d", "34")
    assert code == 0
    assert "soluble\t0" in out


def test_isotropy_count(capsys):
    code, out, _ = run_cli(capsys, "isotropy", "--count", "2")
    assert code == 0
    assert "max_isotropic_count\t6" in out


def test_lattice_subcommand(capsys):
    code, out, _ = run_cli(capsys, "lattice", "--matrix", "0,1;1,0")
    assert code == 0
    assert "multiplicities\t0\t0\t1" in out


def test_condition_check(capsys):
    code, out, _ = run_cli(capsys, "condition-check", "--curve", "0,1,4")
    assert code == 0
    assert "satisfied\t0" in out
    assert "invariant_line" in out


def test_env_override(capsys, monkeypatch):
    monkeypatch.setenv("SELMERLAB_SEED", "123")
    code, out, _ = run_cli(capsys, "dist", "--alpha", "0")
    assert code == 0
    assert "# seed=123" in out


def test_main_term_via_cli(capsys):
    code, out, _ = run_cli(capsys, "isotropy", "--main-term",
                           "--curve", "0,1,-1", "--b", "1")
    assert code == 0
    assert "equal\t1" in out
