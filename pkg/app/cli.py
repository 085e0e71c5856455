"""Command line front end: ``expsieve <command> [options]``.

Exit status is 0 when the command completed with a certificate or solutions, 1
when it completed without one (survivors remain, budget exhausted, a check
failed) and 2 for usage and input errors.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, List, Optional, Sequence, TextIO, Tuple

from pydantic import ValidationError

from .core.config import configure_logging, settings
from .core.errors import (
    BudgetExceededError,
    CertificateError,
    EmptySearchBoxError,
    EquationSyntaxError,
    ExpSieveError,
    InvalidEquationError,
    InvariantViolationError,
    MissingAssignmentError,
    PipelineStageError,
    ProofStepError,
    TableDataError,
    VariableMismatchError,
)
from .models import Command, ConstraintSet, ExpEquation, OutputFormat, RunConfig, SieveOutcome
from .services.baker_service import (
    bound_summary,
    padic_case_constants,
    rational_case_check,
    resolve_padic_x_case,
    resolve_padic_y_case,
    resolve_rational_case,
    solve_s_threshold_report,
)
from .services.casework_service import full_theorem_pipeline, replay_table1, replay_table2
from .services.certificate_service import (
    bound_certificate,
    dump_certificate,
    load_certificate,
    sieve_certificate,
    verify_certificate,
)
from .services.equation_service import brute_force_solutions, shifted_equation, size_constraints
from .services.parsing import format_modulus, parse_constraints, parse_equation, parse_modulus, render
from .services.report_service import generate_outcome_pdf, generate_pipeline_pdf
from .services.sieve_service import auto_modulus_search, sieve, sieve_chain

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_UNCERTIFIED, EXIT_USAGE = 0, 1, 2

BOUND_CASES = ("s-threshold", "rational", "padic-y", "padic-x", "constants", "summary")

# error class -> (diagnostic prefix, exit status)
DIAGNOSTICS: List[Tuple[type, str, int]] = [
    (EquationSyntaxError, "syntax error", EXIT_USAGE),
    (InvalidEquationError, "invalid input", EXIT_USAGE),
    (MissingAssignmentError, "missing assignment", EXIT_USAGE),
    (EmptySearchBoxError, "empty search box", EXIT_USAGE),
    (VariableMismatchError, "variable mismatch", EXIT_USAGE),
    (CertificateError, "certificate error", EXIT_USAGE),
    (InvariantViolationError, "invariant violation", EXIT_USAGE),
    (BudgetExceededError, "budget exceeded", EXIT_UNCERTIFIED),
    (PipelineStageError, "pipeline stage failed", EXIT_UNCERTIFIED),
    (ProofStepError, "proof step failed", EXIT_UNCERTIFIED),
    (TableDataError, "table data error", EXIT_UNCERTIFIED),
]


def _modulus_caps(text: str) -> dict:
    """``2:4,3:3`` -> {2: 4, 3: 3}."""
    caps = {}
    for part in text.split(","):
        prime, _, cap = part.partition(":")
        caps[int(prime)] = int(cap)
    return caps


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.TEXT.value)
    common.add_argument("--budget", type=int, default=settings.ENUMERATION_BUDGET,
                        help="enumeration budget (EXPSIEVE_BUDGET)")
    common.add_argument("--precision", type=int, default=settings.WORKING_PRECISION, help="working precision in bits")
    common.add_argument("--threads", "--workers", dest="threads", type=int, default=settings.WORKERS)
    common.add_argument("--out", type=Path, default=None, help="write the report here instead of stdout")
    common.add_argument("--log-level", default=None)

    equation = argparse.ArgumentParser(add_help=False)
    equation.add_argument("--eq", dest="equation", help='equation text, e.g. "3^x+4^y+5^z=6^w"')
    equation.add_argument("--family-e", type=int, help="use (4^e-1)^x+(4^e)^y+(4^e+1)^z=(4^e+2)^w")
    equation.add_argument("--constraint", dest="constraints", action="append", default=[],
                          help='e.g. "x>=3", "y odd", "x≡1 mod 4" (repeatable)')
    equation.add_argument("--no-size-bounds", dest="size_bounds", action="store_false",
                          help="do not add the lower bounds implied by term sizes")

    parser = argparse.ArgumentParser(prog="expsieve", description="Sieve, bound and certify purely exponential equations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common, equation], help="exhaustive search in a box")
    p.add_argument("--max-exp", type=int, required=True)

    for name, helptext in (("sieve", "sieve with one modulus"), ("chain", "sieve with several moduli in turn")):
        p = sub.add_parser(name, parents=[common, equation], help=helptext)
        p.add_argument("--modulus", dest="moduli", action="append", default=[], help="e.g. 2^2*7*13 (repeatable)")

    p = sub.add_parser("auto-modulus", parents=[common, equation], help="search moduli built from small primes")
    p.add_argument("--primes", type=lambda s: [int(v) for v in s.split(",")], required=True)
    p.add_argument("--caps", type=_modulus_caps, default={}, help="largest exponent per prime, e.g. 2:4,3:3")

    p = sub.add_parser("bounds", parents=[common], help="Baker bounds and thresholds")
    p.add_argument("--case", dest="bound", choices=BOUND_CASES, required=True)
    p.add_argument("--e", type=int, default=None)

    p = sub.add_parser("replay-table", parents=[common], help="replay the published moduli tables")
    p.add_argument("--table", type=int, choices=(1, 2), required=True)

    sub.add_parser("pipeline", parents=[common], help="run every verification stage")

    p = sub.add_parser("verify", parents=[common], help="re-check a certificate file")
    p.add_argument("certificate", type=Path)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        equation=getattr(args, "equation", None),
        family_e=getattr(args, "family_e", None),
        moduli=getattr(args, "moduli", []),
        constraints=getattr(args, "constraints", []),
        primes=getattr(args, "primes", []),
        exponent_caps=getattr(args, "caps", {}),
        max_exp=getattr(args, "max_exp", None),
        budget=args.budget,
        output_format=args.format,
        precision=args.precision,
        threads=args.threads,
        out=args.out,
        size_bounds=getattr(args, "size_bounds", True),
        table=getattr(args, "table", None),
        bound=getattr(args, "bound", None),
        e=getattr(args, "e", None),
        certificate=getattr(args, "certificate", None),
    )


def _equation(config: RunConfig) -> ExpEquation:
    if config.family_e is not None:
        return shifted_equation(4**config.family_e)
    return parse_equation(config.equation)


def _constraints(config: RunConfig, eq: ExpEquation) -> ConstraintSet:
    constraints = parse_constraints(config.constraints)
    if config.size_bounds:
        constraints = size_constraints(eq).merged(constraints)
    return constraints


class _Output:
    """Collects the report and writes it to --out or stdout."""

    def __init__(self, config: RunConfig, stream: TextIO):
        self.config = config
        self.stream = stream

    @property
    def json(self) -> bool:
        return self.config.output_format == OutputFormat.JSON

    def emit(self, text: str = "", document: Any = None) -> None:
        body = json.dumps(document, ensure_ascii=False, indent=2) if self.json else text
        if self.config.out is not None:
            self.config.out.write_text(body + "\n", encoding="utf-8")
        else:
            print(body, file=self.stream)

    def emit_pdf(self, pdf: bytes) -> None:
        self.config.out.write_bytes(pdf)
        print(f"wrote {self.config.out}", file=self.stream)


def _outcome_text(eq: ExpEquation, outcome: SieveOutcome, constraints: ConstraintSet) -> str:
    lines = [render(eq), "constraints: " + (", ".join(constraints.describe()) or "none")]
    for step in outcome.steps:
        lines.append(f"  M={format_modulus(step.modulus)}: {step.entries} entries, "
                     f"{step.all_class_entries} all-class, periods {step.periods}")
    lines.append(outcome.summary())
    if outcome.survivors is not None:
        system = outcome.survivors
        small = "; ".join(f"{v} in {vals}" for v, vals in system.small_values.items() if vals) or "none"
        lines.append(f"joint period {system.period_lcm()}, explicit exponents: {small}")
    return "\n".join(lines)


def _run_sieve(config: RunConfig, out: _Output) -> int:
    eq = _equation(config)
    constraints = _constraints(config, eq)
    moduli = [parse_modulus(m) for m in config.moduli]
    if config.command == Command.SIEVE:
        outcome = sieve(eq, moduli[0], constraints, config.budget)
    else:
        outcome = sieve_chain(eq, moduli, constraints, config.budget)
    if config.output_format == OutputFormat.PDF:
        out.emit_pdf(generate_outcome_pdf(eq, outcome, constraints.describe()))
    elif out.json:
        out.emit(document=json.loads(dump_certificate(sieve_certificate(eq, outcome, constraints))))
    else:
        out.emit(_outcome_text(eq, outcome, constraints))
    return EXIT_OK if outcome.certified else EXIT_UNCERTIFIED


def _run_solve(config: RunConfig, out: _Output) -> int:
    eq = _equation(config)
    constraints = _constraints(config, eq)
    solutions = brute_force_solutions(eq, config.max_exp, constraints, config.threads)
    out.emit("\n".join([f"{len(solutions)} solutions"] + [str(s) for s in solutions]),
             {"equation": render(eq), "max_exp": config.max_exp, "solutions": solutions})
    return EXIT_OK


def _run_auto(config: RunConfig, out: _Output) -> int:
    eq = _equation(config)
    constraints = _constraints(config, eq)
    found = auto_modulus_search(eq, config.primes, config.exponent_caps, config.budget, constraints, config.threads,
                                size_bounds=config.size_bounds)
    lines = [f"M={format_modulus(M)}: {outcome.summary()}" for M, outcome in found] or ["no certifying modulus"]
    document = {
        "equation": render(eq),
        "certificates": [json.loads(dump_certificate(sieve_certificate(eq, o, constraints))) for _, o in found],
    }
    out.emit("\n".join(lines), document)
    return EXIT_OK if found else EXIT_UNCERTIFIED


def _needs_e(config: RunConfig) -> int:
    if config.e is None:
        raise InvalidEquationError(f"--case {config.bound} needs --e")
    return config.e


def _run_bounds(config: RunConfig, out: _Output) -> int:
    case = config.bound
    certificate = None
    status = EXIT_OK
    if case == "s-threshold":
        e = _needs_e(config)
        report = solve_s_threshold_report(e, config.precision)
        document, text = report.model_dump(mode="json"), f"e={e}: s < {report.threshold}"
        if report.crossing_unique:
            certificate = bound_certificate("s_threshold", e)
        else:
            text += " (crossing not certified unique)"
            status = EXIT_UNCERTIFIED
    elif case == "rational":
        if config.e is not None:
            check = rational_case_check(config.e)
            document, text = check.model_dump(mode="json"), f"e={config.e}: {check.label} {check.verdict.value}"
        else:
            top = resolve_rational_case()
            document, text = {"max_e": top}, f"rational case compatible up to e={top}"
            certificate = bound_certificate("rational_case")
    elif case in ("padic-y", "padic-x"):
        e = _needs_e(config)
        resolve = resolve_padic_y_case if case == "padic-y" else resolve_padic_x_case
        report = resolve(e)
        document, text = report.model_dump(mode="json"), f"{report.case} at e={e}: {report.result.value}"
        certificate = bound_certificate(case.replace("-", "_") + "_case", e)
    elif case == "constants":
        comparisons = padic_case_constants(_needs_e(config))
        document = [c.model_dump(mode="json") for c in comparisons]
        text = "\n".join(f"{c.case}: {'agree' if c.agree else 'DIFFER'}" for c in comparisons)
    else:
        document = bound_summary(_needs_e(config))
        text = "\n".join(f"{k}: {v}" for k, v in document.items())
    if certificate is not None and out.json:
        document = {"report": document, "certificate": json.loads(dump_certificate(certificate))}
    out.emit(text, document)
    return status


def _run_replay(config: RunConfig, out: _Output) -> int:
    rows = replay_table1() if config.table == 1 else replay_table2()
    lines = []
    for row in rows:
        if config.table == 1:
            lines.append(f"e={row.e} {row.label} M={row.modulus}: {row.reproduced} "
                         f"({'match' if row.matches else 'MISMATCH'})")
        else:
            lines.append(f"{row.case}: {row.outcome.summary()} ({'match' if row.matches else 'MISMATCH'})")
    out.emit("\n".join(lines), [row.model_dump(mode="json", by_alias=True) for row in rows])
    return EXIT_OK if all(row.matches for row in rows) else EXIT_UNCERTIFIED


def _run_pipeline(config: RunConfig, out: _Output) -> int:
    report = full_theorem_pipeline()
    if config.output_format == OutputFormat.PDF:
        out.emit_pdf(generate_pipeline_pdf(report))
        return EXIT_OK
    lines = [f"{stage.name}: {stage.claim} [{'verified' if stage.verified else 'FAILED'}]" for stage in report.stages]
    lines += ["solutions (n, x, y, z, w):"] + [str(tuple(s)) for s in report.solutions]
    document = report.deterministic_dump()
    document["timing"] = report.timing
    out.emit("\n".join(lines), document)
    return EXIT_OK


def _run_verify(config: RunConfig, out: _Output) -> int:
    result = verify_certificate(load_certificate(config.certificate))
    text = ("valid: " if result.valid else "invalid: ") + result.detail
    if result.first_difference:
        text += f"\nfirst difference: {result.first_difference}"
    out.emit(text, result.model_dump(mode="json"))
    return EXIT_OK if result.valid else EXIT_UNCERTIFIED


HANDLERS = {
    Command.SOLVE: _run_solve,
    Command.SIEVE: _run_sieve,
    Command.CHAIN: _run_sieve,
    Command.AUTO_MODULUS: _run_auto,
    Command.BOUNDS: _run_bounds,
    Command.REPLAY_TABLE: _run_replay,
    Command.PIPELINE: _run_pipeline,
    Command.VERIFY: _run_verify,
}


def run(config: RunConfig, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    """Execute one command; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    previous, settings.WORKING_PRECISION = settings.WORKING_PRECISION, config.precision
    try:
        return HANDLERS[config.command](config, _Output(config, stdout))
    except ExpSieveError as exc:
        for error_class, prefix, status in DIAGNOSTICS:
            if isinstance(exc, error_class):
                print(f"{prefix}: {exc}", file=stderr)
                return status
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    finally:
        settings.WORKING_PRECISION = previous


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        config = config_from_args(args)
    except ValidationError as exc:
        message = exc.errors()[0]["msg"].removeprefix("Value error, ")
        print(f"usage error: {message}", file=sys.stderr)
        return EXIT_USAGE
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
