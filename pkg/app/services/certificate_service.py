import json
import logging
from pathlib import Path
from typing import Callable, Dict, Optional

from pydantic import ValidationError

from ..core.config import settings
from ..core.errors import CertificateError, ExpSieveError
from ..models import (
    BoundClaim,
    Certificate,
    CertificateKind,
    Compatibility,
    ConstraintSet,
    ExpEquation,
    SieveOutcome,
    VerificationResult,
)
from .baker_service import resolve_padic_x_case, resolve_padic_y_case, resolve_rational_case, solve_s_threshold
from .parsing import format_modulus, parse_constraints, parse_modulus
from .sieve_service import sieve_chain

logger = logging.getLogger(__name__)


def _compatible(resolve: Callable[[int], object]) -> Callable[[Optional[int]], int]:
    return lambda e: int(resolve(e).result == Compatibility.COMPATIBLE)


# padic cases report 1 for compatible and 0 for incompatible
BOUND_OPERATIONS: Dict[str, Callable[[Optional[int]], int]] = {
    "s_threshold": solve_s_threshold,
    "rational_case": lambda e: resolve_rational_case(),
    "padic_y_case": _compatible(resolve_padic_y_case),
    "padic_x_case": _compatible(resolve_padic_x_case),
}


def sieve_certificate(eq: ExpEquation, outcome: SieveOutcome, constraints: ConstraintSet, label: str = "") -> Certificate:
    kind = CertificateKind.SIEVE if len(outcome.moduli) == 1 else CertificateKind.CHAIN
    return Certificate(
        kind=kind,
        label=label,
        equation=eq,
        moduli=[format_modulus(M) for M in outcome.moduli],
        constraints=constraints.describe(),
        outcome=outcome,
    )


def _evaluate_bound(operation: str, e: Optional[int]) -> int:
    if operation not in BOUND_OPERATIONS:
        raise CertificateError(f"unknown bound operation {operation!r}")
    if operation != "rational_case" and e is None:
        raise CertificateError(f"{operation} needs e")
    return BOUND_OPERATIONS[operation](e)


def bound_certificate(operation: str, e: Optional[int] = None) -> Certificate:
    value = _evaluate_bound(operation, e)
    label = operation if e is None else f"{operation}, e={e}"
    return Certificate(
        kind=CertificateKind.BOUND,
        label=label,
        bound=BoundClaim(operation=operation, e=e, value=value, precision=settings.WORKING_PRECISION),
    )


def _entry_text(entry, system) -> str:
    parts = []
    for var, slot, period in zip(system.variables, entry, system.moduli):
        parts.append(f"{var}={slot.value}" if slot.explicit else f"{var}≡{slot.value} mod {period}")
    return "(" + ", ".join(parts) + ")"


def _compare_outcomes(claimed: SieveOutcome, actual: SieveOutcome) -> VerificationResult:
    if claimed.kind != actual.kind:
        return VerificationResult(valid=False, detail=f"claimed {claimed.kind.value}, recomputed {actual.kind.value}")
    if (claimed.variable, claimed.bound) != (actual.variable, actual.bound):
        return VerificationResult(
            valid=False, detail=f"claimed bound {claimed.variable}<={claimed.bound}, recomputed {actual.variable}<={actual.bound}",
        )
    if (claimed.survivors is None) != (actual.survivors is None):
        return VerificationResult(valid=False, detail="survivor sets differ in presence")
    if claimed.survivors is not None:
        a, b = claimed.survivors, actual.survivors
        if (a.thresholds, a.moduli) != (b.thresholds, b.moduli):
            return VerificationResult(valid=False, detail="survivor grids differ")
        difference = sorted(a.entry_set ^ b.entry_set)
        if difference:
            first = difference[0]
            side = "missing from" if first in b.entry_set else "not produced by"
            return VerificationResult(
                valid=False,
                detail=f"{len(difference)} survivor entries differ",
                first_difference=f"{_entry_text(first, b)} {side} the certificate",
            )
    return VerificationResult(valid=True, detail=actual.summary())


def verify_certificate(cert: Certificate) -> VerificationResult:
    """Recompute what the certificate claims and compare."""
    try:
        if cert.kind == CertificateKind.BOUND:
            if cert.bound is None:
                raise CertificateError("bound certificate without a bound claim")
            value = _evaluate_bound(cert.bound.operation, cert.bound.e)
            if value != cert.bound.value:
                return VerificationResult(valid=False, detail=f"claimed {cert.bound.value}, recomputed {value}")
            return VerificationResult(valid=True, detail=f"{cert.bound.operation} = {value}")

        if cert.equation is None or cert.outcome is None or not cert.moduli:
            raise CertificateError("sieve certificate needs equation, moduli and outcome")
        moduli = [parse_modulus(m) for m in cert.moduli]
        if moduli != cert.outcome.moduli:
            return VerificationResult(valid=False, detail="listed moduli do not match the outcome")
        actual = sieve_chain(cert.equation, moduli, parse_constraints(cert.constraints))
    except CertificateError:
        raise
    except ExpSieveError as exc:
        return VerificationResult(valid=False, detail=f"recomputation failed: {exc}")

    result = _compare_outcomes(cert.outcome, actual)
    logger.info("certificate %r: %s", cert.label, "valid" if result.valid else result.detail)
    return result


def dump_certificate(cert: Certificate) -> str:
    return cert.model_dump_json(by_alias=True, indent=2)


def load_certificate(path: Path) -> Certificate:
    try:
        with open(path, encoding="utf-8") as f:
            document = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise CertificateError(f"cannot read certificate {path}: {exc}") from exc
    return parse_certificate(document)


def parse_certificate(document: dict) -> Certificate:
    """Accepts a bare certificate or a bounds report carrying one under "certificate"."""
    if isinstance(document, dict) and "kind" not in document and "certificate" in document:
        document = document["certificate"]
    try:
        return Certificate.model_validate(document)
    except ValidationError as exc:
        raise CertificateError(f"certificate does not match the schema: {exc.errors()[0]['msg']}") from exc
