from functools import lru_cache
from typing import Any, Dict, Optional

from fastapi import APIRouter, Body, HTTPException, Query
from fastapi.responses import Response

from app.core.errors import (
    BudgetExceededError,
    ExpSieveError,
    InvariantViolationError,
    PipelineStageError,
    ProofStepError,
    TableDataError,
)
from app.models import PipelineReport, SieveRequest, SolveRequest
from app.services import (
    brute_force_solutions,
    family_equation,
    full_theorem_pipeline,
    generate_outcome_pdf,
    generate_pipeline_pdf,
    parse_constraints,
    parse_equation,
    parse_modulus,
    render,
    replay_table1,
    replay_table2,
    resolve_padic_x_case,
    resolve_padic_y_case,
    resolve_rational_case,
    sieve_certificate,
    sieve_chain,
    size_constraints,
    verify_certificate,
)
from app.services.baker_service import rational_case_check, solve_s_threshold_report, valuation_chain_check
from app.services.certificate_service import parse_certificate

router = APIRouter()


def _http_error(exc: ExpSieveError) -> HTTPException:
    if isinstance(exc, BudgetExceededError):
        return HTTPException(status_code=413, detail=str(exc))
    if isinstance(exc, TableDataError):
        return HTTPException(status_code=503, detail=str(exc))
    if isinstance(exc, (InvariantViolationError, ProofStepError, PipelineStageError)):
        return HTTPException(status_code=422, detail=str(exc))
    return HTTPException(status_code=400, detail=str(exc))


@lru_cache(maxsize=1)
def _pipeline_report() -> PipelineReport:
    return full_theorem_pipeline()


@lru_cache(maxsize=1)
def _table1_rows() -> list:
    return [row.model_dump(mode="json", by_alias=True) for row in replay_table1()]


@router.get("/family/{e}", tags=["Equations"])
def get_family_member(e: int):
    """
    Returns the instance (4^e-1)^x + (4^e)^y + (4^e+1)^z = (4^e+2)^w with its growth ratios.
    """
    try:
        instance, eq = family_equation(e)
    except ExpSieveError as exc:
        raise _http_error(exc)
    return {"instance": instance, "equation": render(eq)}


@router.post("/solve", tags=["Equations"])
def solve(request: SolveRequest):
    """
    Exhaustive search with every exponent between 1 and max_exp.
    """
    try:
        eq = parse_equation(request.equation)
        solutions = brute_force_solutions(eq, request.max_exp, parse_constraints(request.constraints), workers=1)
    except ExpSieveError as exc:
        raise _http_error(exc)
    return {"equation": render(eq), "solutions": solutions}


def _run_sieve(request: SieveRequest):
    eq = parse_equation(request.equation)
    constraints = parse_constraints(request.constraints)
    if request.size_bounds:
        constraints = size_constraints(eq).merged(constraints)
    outcome = sieve_chain(eq, [parse_modulus(m) for m in request.moduli], constraints, request.budget)
    return eq, constraints, outcome


@router.post("/sieve", tags=["Sieve"])
def sieve_equation(request: SieveRequest, pdf: bool = Query(False, description="Return a PDF certificate sheet.")):
    """
    Sieves with the given modulus (or moduli, applied in turn) and returns a certificate.
    """
    try:
        eq, constraints, outcome = _run_sieve(request)
    except ExpSieveError as exc:
        raise _http_error(exc)
    if pdf:
        return Response(
            content=generate_outcome_pdf(eq, outcome, constraints.describe()),
            media_type="application/pdf",
            headers={"Content-Disposition": "attachment; filename=sieve_certificate.pdf"},
        )
    return sieve_certificate(eq, outcome, constraints).model_dump(mode="json", by_alias=True)


@router.post("/chain", tags=["Sieve"])
def chain_equation(request: SieveRequest):
    """
    Intersects the survivors of every modulus until a certificate appears.
    """
    try:
        eq, constraints, outcome = _run_sieve(request)
    except ExpSieveError as exc:
        raise _http_error(exc)
    return {
        "certificate": sieve_certificate(eq, outcome, constraints).model_dump(mode="json", by_alias=True),
        "steps": [step.model_dump(mode="json") for step in outcome.steps],
    }


@router.get("/bounds/s-threshold/{e}", tags=["Bounds"])
def s_threshold(e: int):
    try:
        return solve_s_threshold_report(e)
    except ExpSieveError as exc:
        raise _http_error(exc)


@router.get("/bounds/padic/{case}/{e}", tags=["Bounds"])
def padic_case(case: str, e: int):
    """
    Resolves the 2-adic (case=y) or 3-adic (case=x) bound at one e.
    """
    resolvers = {"y": resolve_padic_y_case, "x": resolve_padic_x_case}
    if case not in resolvers:
        raise HTTPException(status_code=404, detail="case is 'x' or 'y'")
    try:
        return resolvers[case](e)
    except ExpSieveError as exc:
        raise _http_error(exc)


@router.get("/bounds/rational", tags=["Bounds"])
def rational_case(e: Optional[int] = Query(None, description="Check a single e instead of resolving the cap.")):
    try:
        if e is not None:
            return rational_case_check(e)
        return {"max_e": resolve_rational_case()}
    except ExpSieveError as exc:
        raise _http_error(exc)


@router.get("/bounds/valuation/{e}", tags=["Bounds"])
def valuation_chain(e: int, solution: str = Query(..., description="Comma-separated x,y,z,w, e.g. '3,3,3,3'.")):
    try:
        values = tuple(int(v.strip()) for v in solution.split(","))
    except ValueError:
        raise HTTPException(status_code=400, detail="solution must be four comma-separated integers")
    if len(values) != 4:
        raise HTTPException(status_code=400, detail="solution must be four comma-separated integers")
    try:
        return valuation_chain_check(e, values)
    except ExpSieveError as exc:
        raise _http_error(exc)


@router.get("/tables/1", tags=["Tables"])
def table1():
    """
    Replays the published moduli for e = 1..8, once per process.
    """
    try:
        return {"rows": _table1_rows()}
    except ExpSieveError as exc:
        raise _http_error(exc)


@router.get("/tables/2", tags=["Tables"])
def table2():
    try:
        rows = replay_table2()
    except ExpSieveError as exc:
        raise _http_error(exc)
    return {"rows": [row.model_dump(mode="json", by_alias=True) for row in rows]}


@router.get("/pipeline", tags=["Pipeline"])
def pipeline():
    """
    Runs every verification stage once per process and returns the report.
    """
    try:
        report = _pipeline_report()
    except ExpSieveError as exc:
        raise _http_error(exc)
    return {**report.deterministic_dump(), "timing": report.timing}


@router.get("/pipeline/report.pdf", tags=["Pipeline"])
def pipeline_pdf():
    try:
        report = _pipeline_report()
    except ExpSieveError as exc:
        raise _http_error(exc)
    return Response(
        content=generate_pipeline_pdf(report),
        media_type="application/pdf",
        headers={"Content-Disposition": "attachment; filename=verification_report.pdf"},
    )


@router.post("/certificates/verify", tags=["Certificates"])
def verify(document: Dict[str, Any] = Body(...)):
    """
    Recomputes the sieve or bound named in the certificate.
    """
    try:
        return verify_certificate(parse_certificate(document))
    except ExpSieveError as exc:
        raise _http_error(exc)
