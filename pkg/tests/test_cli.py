import json

import pytest

from app import cli
from app.cli import EXIT_OK, EXIT_UNCERTIFIED, EXIT_USAGE, main
from app.core.config import settings
from app.services.baker_service import solve_s_threshold_report
from app.services.tables import published_tables

THEOREM = "3^x+4^y+5^z=6^w"


def test_sieve_certifies_family_member(capsys):
    """Test the sieve command on the e = 2 row."""
    assert main(["sieve", "--family-e", "2", "--modulus", "2^2*7*13*19*37*73"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "15^x+16^y+17^z=18^w" in out
    assert "no solution" in out
    assert "w>=2" in out


def test_sieve_with_survivors_exits_one(capsys):
    """Test exit status 1 when survivors remain."""
    assert main(["sieve", "--eq", THEOREM, "--modulus", "2"]) == EXIT_UNCERTIFIED
    assert "surviving entries" in capsys.readouterr().out


def test_syntax_error_exits_two(capsys):
    """Test exit status 2 for a malformed equation."""
    assert main(["sieve", "--eq", "3^x+4^y+=6^w", "--modulus", "2"]) == EXIT_USAGE
    assert "syntax error" in capsys.readouterr().err


def test_sieve_takes_one_modulus(capsys):
    """Test that sieve rejects a second modulus."""
    assert main(["sieve", "--eq", THEOREM, "--modulus", "2", "--modulus", "3"]) == EXIT_USAGE
    assert "usage error" in capsys.readouterr().err


def test_eq_and_family_are_exclusive(capsys):
    """Test that --eq and --family-e conflict."""
    assert main(["sieve", "--eq", THEOREM, "--family-e", "1", "--modulus", "2"]) == EXIT_USAGE


def test_unknown_flag():
    """Test that argparse rejects unknown flags."""
    with pytest.raises(SystemExit) as info:
        main(["sieve", "--bogus"])
    assert info.value.code == 2


def test_budget_exceeded(capsys):
    """Test the budget diagnostic."""
    assert main(["sieve", "--eq", THEOREM, "--modulus", "7", "--budget", "1"]) == EXIT_UNCERTIFIED
    assert "budget exceeded" in capsys.readouterr().err


def test_chain_text_lists_steps(capsys):
    """Test the chain text report."""
    args = ["chain", "--eq", THEOREM, "--no-size-bounds", "--constraint", "x>=3", "--constraint", "y>=2"]
    for m in ("2^4", "7", "3^3", "13", "73"):
        args += ["--modulus", m]
    assert main(args) == EXIT_OK
    out = capsys.readouterr().out
    assert "M=2^4: 8 entries, 2 all-class" in out
    assert "w <= 3" in out


def test_json_output_is_deterministic(capsys):
    """Test that two runs print the same JSON."""
    args = ["sieve", "--eq", THEOREM, "--modulus", "16", "--format", "json"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first
    assert json.loads(first)["kind"] == "sieve"


def test_certificate_round_trip(tmp_path, capsys):
    """Test sieve output fed back to verify."""
    path = tmp_path / "cert.json"
    assert main(["sieve", "--family-e", "3", "--modulus", "2^2*13*37*73", "--format", "json", "--out", str(path)]) == EXIT_OK
    assert main(["verify", str(path)]) == EXIT_OK
    assert capsys.readouterr().out.startswith("valid")


def test_tampered_certificate_exits_one(tmp_path, capsys):
    """Test verify on a modified certificate."""
    path = tmp_path / "cert.json"
    main(["sieve", "--eq", THEOREM, "--modulus", "16", "--format", "json", "--out", str(path)])
    document = json.loads(path.read_text())
    document["outcome"]["survivors"]["entries"].pop()
    path.write_text(json.dumps(document))
    assert main(["verify", str(path)]) == EXIT_UNCERTIFIED
    assert "first difference" in capsys.readouterr().out


def test_verify_bad_file(tmp_path, capsys):
    """Test verify on a file that is not a certificate."""
    path = tmp_path / "cert.json"
    path.write_text("[]")
    assert main(["verify", str(path)]) == EXIT_USAGE
    assert "certificate error" in capsys.readouterr().err


def test_solve(capsys):
    """Test the solve command."""
    assert main(["solve", "--eq", THEOREM, "--max-exp", "20"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("2 solutions")
    assert "'w': 3" in out


def test_bounds_s_threshold(tmp_path, capsys):
    """Test the S threshold text and JSON reports."""
    assert main(["bounds", "--case", "s-threshold", "--e", "1"]) == EXIT_OK
    assert "5042" in capsys.readouterr().out
    path = tmp_path / "bound.json"
    assert main(["bounds", "--case", "s-threshold", "--e", "1", "--format", "json", "--out", str(path)]) == EXIT_OK
    assert json.loads(path.read_text())["report"]["threshold"] == 5042
    assert main(["verify", str(path)]) == EXIT_OK


def test_bounds_needs_e(capsys):
    """Test that the p-adic cases need --e."""
    assert main(["bounds", "--case", "padic-y"]) == EXIT_USAGE
    assert "needs --e" in capsys.readouterr().err


def test_bounds_invariant_violation(capsys):
    """Test the diagnostic for e = 1 in the 3-adic case."""
    assert main(["bounds", "--case", "padic-x", "--e", "1"]) == EXIT_USAGE
    assert "invariant violation" in capsys.readouterr().err


def test_replay_table2(capsys):
    """Test the Table 2 replay command."""
    assert main(["replay-table", "--table", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("(match)") == 4


def test_auto_modulus(capsys):
    """Test the auto-modulus command."""
    assert main(["auto-modulus", "--eq", "7^x+8^y+9^z=10^w", "--primes", "2,3"]) == EXIT_OK
    assert "M=3: no solution" in capsys.readouterr().out


def test_pdf_needs_out(capsys):
    """Test that PDF output needs --out."""
    assert main(["chain", "--eq", THEOREM, "--modulus", "16", "--format", "pdf"]) == EXIT_USAGE


def test_pdf_written(tmp_path, capsys):
    """Test the PDF sheet for a chain."""
    path = tmp_path / "sheet.pdf"
    status = main(["chain", "--eq", THEOREM, "--modulus", "16", "--modulus", "7",
                   "--format", "pdf", "--out", str(path)])
    assert status in (EXIT_OK, EXIT_UNCERTIFIED)
    assert path.read_bytes().startswith(b"%PDF")
    assert f"wrote {path}" in capsys.readouterr().out


@pytest.mark.slow
def test_pipeline(capsys):
    """Test the pipeline command."""
    assert main(["pipeline"]) == EXIT_OK
    assert "(3, 3, 3, 3, 3)" in capsys.readouterr().out


def test_sieve_text_reports_survivor_shape(capsys):
    """Survivors come with their joint period and the exponents that are listed outright."""
    assert main(["sieve", "--eq", THEOREM, "--modulus", "16"]) == EXIT_UNCERTIFIED
    out = capsys.readouterr().out
    assert "joint period 4" in out
    assert "explicit exponents: " in out
    assert "w in [2, 3]" in out


def test_s_threshold_without_unique_crossing(monkeypatch, capsys):
    """A threshold whose crossing is not certified unique gets no certificate."""
    report = solve_s_threshold_report(1).model_copy(update={"crossing_unique": False})
    monkeypatch.setattr(cli, "solve_s_threshold_report", lambda e, precision=None: report)
    assert main(["bounds", "--case", "s-threshold", "--e", "1"]) == EXIT_UNCERTIFIED
    assert "not certified unique" in capsys.readouterr().out


def test_missing_table_data(tmp_path, monkeypatch, capsys):
    """Replays report missing table data as a diagnostic, not a traceback."""
    monkeypatch.setattr(settings, "TABLES_FILE", tmp_path / "absent.json")
    published_tables.cache_clear()
    try:
        assert main(["replay-table", "--table", "2"]) == EXIT_UNCERTIFIED
        assert "table data error" in capsys.readouterr().err
    finally:
        published_tables.cache_clear()
