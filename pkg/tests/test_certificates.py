import json

import pytest

from app.cli import main
from app.core.errors import CertificateError
from app.models import CertificateKind
from app.services.casework_service import full_theorem_pipeline
from app.services.certificate_service import (
    bound_certificate,
    dump_certificate,
    load_certificate,
    parse_certificate,
    sieve_certificate,
    verify_certificate,
)
from app.services.equation_service import shifted_equation, size_constraints
from app.services.parsing import parse_constraints, parse_equation, parse_modulus
from app.services.sieve_service import sieve, sieve_chain


def _table1_e3_certificate():
    eq = shifted_equation(64)
    constraints = size_constraints(eq)
    outcome = sieve(eq, parse_modulus("2^2*13*37*73"), constraints)
    return sieve_certificate(eq, outcome, constraints, "table 1, e=3")


def _survivor_certificate():
    eq = parse_equation("3^x+4^y+5^z=6^w")
    constraints = parse_constraints(["x>=3", "y>=2"])
    return sieve_certificate(eq, sieve(eq, 16, constraints), constraints)


def test_no_solution_certificate_is_valid():
    """Test the e = 3 certificate."""
    cert = _table1_e3_certificate()
    assert cert.kind == CertificateKind.SIEVE
    assert cert.moduli == ["2^2*13*37*73"]
    result = verify_certificate(cert)
    assert result.valid


def test_certificate_file_round_trip(tmp_path):
    """Test a certificate read back from disk."""
    path = tmp_path / "cert.json"
    path.write_text(dump_certificate(_table1_e3_certificate()))
    assert verify_certificate(load_certificate(path)).valid


def test_chain_certificate():
    """Test a chain certificate."""
    eq = parse_equation("3^x+4^y+5^z=6^w")
    constraints = parse_constraints(["x>=3", "y>=2"])
    cert = sieve_certificate(eq, sieve_chain(eq, [16, 7, 27, 13, 73], constraints), constraints)
    assert cert.kind == CertificateKind.CHAIN
    assert cert.moduli == ["2^4", "7", "3^3", "13", "73"]
    assert verify_certificate(cert).valid


def test_survivor_certificate_is_valid():
    """Test a certificate that lists survivors."""
    assert verify_certificate(_survivor_certificate()).valid


def test_tampered_survivors_are_caught():
    """Test that a deleted survivor is reported."""
    document = json.loads(dump_certificate(_survivor_certificate()))
    document["outcome"]["survivors"]["entries"].pop(0)
    result = verify_certificate(parse_certificate(document))
    assert not result.valid
    assert "missing from the certificate" in result.first_difference


def test_tampered_kind_is_caught():
    """Test that a changed modulus is caught."""
    document = json.loads(dump_certificate(_table1_e3_certificate()))
    document["outcome"]["moduli"] = ["7"]
    document["moduli"] = ["7"]
    result = verify_certificate(parse_certificate(document))
    assert not result.valid


def test_bound_certificate():
    """Test the S threshold certificate."""
    cert = bound_certificate("s_threshold", 1)
    assert cert.bound.value == 5042
    assert verify_certificate(cert).valid


def test_tampered_bound_is_caught():
    """Test that a changed bound value is caught."""
    document = json.loads(dump_certificate(bound_certificate("rational_case")))
    document["bound"]["value"] = 9
    result = verify_certificate(parse_certificate(document))
    assert not result.valid
    assert "recomputed 8" in result.detail


def test_unknown_bound_operation():
    """Test that an unknown bound operation is a certificate error."""
    document = json.loads(dump_certificate(bound_certificate("s_threshold", 2)))
    document["bound"]["operation"] = "nonsense"
    with pytest.raises(CertificateError):
        verify_certificate(parse_certificate(document))


def test_wrapped_certificate_is_unwrapped():
    """Test a certificate nested in a bounds report."""
    document = {"report": {}, "certificate": json.loads(dump_certificate(bound_certificate("padic_y_case", 9)))}
    cert = parse_certificate(document)
    assert cert.bound.value == 0
    assert verify_certificate(cert).valid


def test_schema_error():
    """Test that a bogus kind is a schema error."""
    with pytest.raises(CertificateError):
        parse_certificate({"kind": "bogus"})


def test_unreadable_file(tmp_path):
    """Test broken and missing files."""
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(CertificateError):
        load_certificate(path)
    with pytest.raises(CertificateError):
        load_certificate(tmp_path / "missing.json")


THEOREM = "3^x+4^y+5^z=6^w"

RUNS = [
    ["sieve", "--family-e", "2", "--modulus", "2^2*7*13*19*37*73"],
    ["sieve", "--eq", THEOREM, "--modulus", "7"],
    ["chain", "--eq", THEOREM, "--constraint", "x>=3", "--constraint", "y>=2", "--no-size-bounds",
     "--modulus", "2^4", "--modulus", "7", "--modulus", "3^3", "--modulus", "13", "--modulus", "73"],
    ["chain", "--eq", THEOREM, "--constraint", "x=1", "--constraint", "y>=2", "--modulus", "3^2", "--modulus", "7"],
    ["bounds", "--case", "s-threshold", "--e", "4"],
    ["bounds", "--case", "rational"],
    ["bounds", "--case", "padic-y", "--e", "9"],
    ["bounds", "--case", "padic-x", "--e", "8"],
    ["auto-modulus", "--eq", "7^x+8^y+9^z=10^w", "--primes", "2,3"],
]


def _emitted(document):
    if "certificates" in document:
        return document["certificates"]
    return [document.get("certificate", document)]


@pytest.mark.parametrize("args", RUNS, ids=lambda args: " ".join(args[:3]))
def test_emitted_certificates_verify(args, tmp_path):
    """Whatever a run writes as a certificate, with or without survivors, checks out."""
    path = tmp_path / "run.json"
    main(args + ["--format", "json", "--out", str(path)])
    documents = _emitted(json.loads(path.read_text(encoding="utf-8")))
    assert documents
    for document in documents:
        assert verify_certificate(parse_certificate(document)).valid


@pytest.mark.slow
def test_pipeline_certificates_verify():
    """Every certificate collected by a reduced pipeline run re-verifies."""
    report = full_theorem_pipeline(structure_cap=64, proof_cap=16)
    assert report.certificates
    for cert in report.certificates:
        assert verify_certificate(cert).valid
