from .parsing import parse_equation, render, parse_modulus, format_modulus, parse_constraints
from .equation_service import evaluate, brute_force_solutions, shifted_equation, family_equation, size_constraints
from .sieve_service import residue_sequence, sieve, intersect, sieve_chain, auto_modulus_search
from .baker_service import (
    padic_bound,
    rational_bound,
    resolve_padic_y_case,
    resolve_padic_x_case,
    solve_s_threshold,
    resolve_rational_case,
)
from .certificate_service import sieve_certificate, bound_certificate, verify_certificate, load_certificate
from .casework_service import (
    check_mod3_exclusion,
    derive_parity_constraints,
    build_deduction_trace,
    replay_table1,
    replay_table2,
    full_theorem_pipeline,
)
from .report_service import generate_outcome_pdf, generate_pipeline_pdf

__all__ = [
    "parse_equation",
    "render",
    "parse_modulus",
    "format_modulus",
    "parse_constraints",
    "evaluate",
    "brute_force_solutions",
    "shifted_equation",
    "family_equation",
    "size_constraints",
    "residue_sequence",
    "sieve",
    "intersect",
    "sieve_chain",
    "auto_modulus_search",
    "padic_bound",
    "rational_bound",
    "resolve_padic_y_case",
    "resolve_padic_x_case",
    "solve_s_threshold",
    "resolve_rational_case",
    "sieve_certificate",
    "bound_certificate",
    "verify_certificate",
    "load_certificate",
    "check_mod3_exclusion",
    "derive_parity_constraints",
    "build_deduction_trace",
    "replay_table1",
    "replay_table2",
    "full_theorem_pipeline",
    "generate_outcome_pdf",
    "generate_pipeline_pdf",
]
