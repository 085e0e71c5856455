"""Explicit lower bounds for linear forms in two logarithms and the e <= 8 resolutions.

Every real quantity is an outward-rounded interval, so an inequality reported as
failing fails for the exact reals as well.
"""
import logging
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Dict, List, Optional, Tuple, Union

from sympy import factorint, isprime, multiplicity

from ..core.config import settings
from ..core.errors import InvariantViolationError
from ..models import (
    BakerPadicParams,
    BakerRationalParams,
    BoundKind,
    BoundReport,
    CaseReport,
    Compatibility,
    ConstantComparison,
    LogTerm,
    ThresholdReport,
    ValuationChainReport,
    ValuationCheck,
    Verdict,
)
from .rigorous import (
    ceil_int,
    certainly_at_least,
    certainly_less,
    compare,
    dominant_branch,
    exact,
    growth_ratios,
    interval_context,
    interval_max,
    log_term,
    to_model,
    upper,
)

logger = logging.getLogger(__name__)

RationalLike = Union[int, Fraction, str]

TRIAL_DIVISION_LIMIT = 10**6
S_SEARCH_CEILING = 10**9


def _rational(q: RationalLike) -> Fraction:
    q = Fraction(q)
    if q == 0:
        raise InvariantViolationError("zero has no height or valuation")
    return q


def height_term(q: RationalLike) -> LogTerm:
    """h(p/q) = log max(|p|, |q|) as an exact symbolic term."""
    q = _rational(q)
    return LogTerm(argument=max(abs(q.numerator), q.denominator))


def log_height(q: RationalLike, precision: Optional[int] = None) -> float:
    ctx = interval_context(precision)
    return float(log_term(ctx, height_term(q)).mid)


def padic_valuation(q: RationalLike, p: int) -> int:
    q = _rational(q)
    return multiplicity(p, abs(q.numerator)) - multiplicity(p, q.denominator)


def _coprime_basis(numbers: List[int]) -> List[int]:
    basis = set()
    for n in numbers:
        basis.update(k for k in factorint(n, limit=TRIAL_DIVISION_LIMIT) if k > 1)
    changed = True
    while changed:
        changed = False
        ordered = sorted(basis)
        for i, a in enumerate(ordered):
            for b in ordered[i + 1:]:
                g = gcd(a, b)
                if g > 1:
                    basis -= {a, b}
                    basis.update(k for k in (g, a // g, b // g) if k > 1)
                    changed = True
                    break
            if changed:
                break
    return sorted(basis)


def _exponents(n: int, basis: List[int]) -> List[int]:
    vector = []
    for beta in basis:
        k = multiplicity(beta, n)
        n //= beta**k
        vector.append(k)
    if n != 1:
        raise InvariantViolationError(f"cannot express {n} over the coprime basis")
    return vector


@lru_cache(maxsize=None)
def multiplicatively_independent(alpha1: Fraction, alpha2: Fraction) -> bool:
    """True iff alpha1^m * alpha2^n = 1 forces m = n = 0."""
    parts = [abs(alpha1.numerator), alpha1.denominator, abs(alpha2.numerator), alpha2.denominator]
    basis = _coprime_basis(parts)
    num1, den1, num2, den2 = (_exponents(n, basis) for n in parts)
    v1 = [a - b for a, b in zip(num1, den1)]
    v2 = [a - b for a, b in zip(num2, den2)]
    return any(v1[i] * v2[j] != v1[j] * v2[i] for i in range(len(basis)) for j in range(i + 1, len(basis)))


def check_padic_params(params: BakerPadicParams) -> None:
    p, E = params.p, params.E
    problems = []
    if not isprime(p):
        problems.append(f"p={p} is not prime")
    elif E <= 1 + Fraction(1, p - 1):
        problems.append(f"E={E} must exceed 1+1/(p-1)")
    for name, alpha, H in (("alpha1", params.alpha1, params.H1), ("alpha2", params.alpha2, params.H2)):
        if padic_valuation(alpha, p) != 0:
            problems.append(f"{name}={alpha} is not a {p}-adic unit")
        elif padic_valuation(alpha**params.g - 1, p) < E:
            problems.append(f"nu_{p}({name}^g - 1) < E")
        if not H.dominates(height_term(alpha)):
            problems.append(f"{H.describe()} < h({name})")
        if not H.dominates(LogTerm(scale=E, argument=p)):
            problems.append(f"{H.describe()} < E*log p")
    if p == 2 and padic_valuation(params.alpha2 - 1, 2) < 2:
        problems.append("nu_2(alpha2 - 1) < 2")
    if not problems and not multiplicatively_independent(params.alpha1, params.alpha2):
        problems.append("alpha1 and alpha2 are multiplicatively dependent")
    if problems:
        raise InvariantViolationError("; ".join(problems))


def check_rational_params(params: BakerRationalParams, precision: Optional[int] = None) -> None:
    ctx = interval_context(precision)
    problems = []
    for name, alpha, H in (("alpha1", params.alpha1, params.H1), ("alpha2", params.alpha2, params.H2)):
        if alpha <= 1:
            problems.append(f"{name}={alpha} must exceed 1")
            continue
        if not H.dominates(height_term(alpha)) or not H.dominates(LogTerm(argument=alpha)):
            problems.append(f"{H.describe()} < max(h({name}), log {name})")
        if not certainly_at_least(log_term(ctx, H), ctx.mpf(1)):
            problems.append(f"{H.describe()} < 1")
    if not problems and not multiplicatively_independent(params.alpha1, params.alpha2):
        problems.append("alpha1 and alpha2 are multiplicatively dependent")
    if problems:
        raise InvariantViolationError("; ".join(problems))


def _regime(branch: str, first: str, second: str) -> str:
    return {"first": first, "second": second}.get(branch, "ambiguous")


def padic_bound(params: BakerPadicParams, precision: Optional[int] = None) -> BoundReport:
    """Upper bound for nu_p(alpha1^b1 - alpha2^b2)."""
    check_padic_params(params)
    ctx = interval_context(precision)
    H1, H2 = log_term(ctx, params.H1), log_term(ctx, params.H2)
    E = exact(ctx, params.E)
    log_p = ctx.ln(ctx.mpf(params.p))
    b_prime = ctx.mpf(params.b1) / H2 + ctx.mpf(params.b2) / H1
    logarithmic = ctx.ln(b_prime) + ctx.ln(E * log_p) + ctx.mpf("0.4")
    linear = 6 * E * log_p
    value = ctx.mpf("36.1") * params.g * H1 * H2 / (E**3 * log_p**4) * interval_max(ctx, logarithmic, linear) ** 2
    return BoundReport(
        kind=BoundKind.PADIC,
        bound_value=upper(value),
        interval=to_model(value),
        regime=_regime(dominant_branch(logarithmic, linear), "log b' branch", "6E log p branch"),
        precision=ctx.prec,
        inputs=params.model_dump(mode="json"),
    )


def rational_bound(params: BakerRationalParams, precision: Optional[int] = None) -> BoundReport:
    """Upper bound for -log|b2 log alpha2 - b1 log alpha1|."""
    check_rational_params(params, precision)
    ctx = interval_context(precision)
    H1, H2 = log_term(ctx, params.H1), log_term(ctx, params.H2)
    b_prime = ctx.mpf(params.b1) / H2 + ctx.mpf(params.b2) / H1
    logarithmic = ctx.ln(b_prime) + ctx.mpf("0.38")
    constant = ctx.mpf(10)
    value = ctx.mpf("25.2") * H1 * H2 * interval_max(ctx, logarithmic, constant) ** 2
    return BoundReport(
        kind=BoundKind.RATIONAL,
        bound_value=upper(value),
        interval=to_model(value),
        regime=_regime(dominant_branch(logarithmic, constant), "log b' branch", "constant 10 branch"),
        precision=ctx.prec,
        inputs=params.model_dump(mode="json"),
    )


def _interval_min(ctx, x, y):
    return -interval_max(ctx, -x, -y)


def w_lower_bound(ctx, N: int):
    """N / (mu_x + mu_z)."""
    mu_x, _, mu_z = growth_ratios(ctx, N)
    return ctx.mpf(N) / (mu_x + mu_z)


def _resolve(case: str, e: int, prefactor_check, constant, threshold, scale: int, log_cap) -> CaseReport:
    """Shared shape of both p-adic resolutions.

    From w < 2C (max{log(scale*w), log_cap})^2 and w > N/(mu_x+mu_z): the log branch
    needs w > threshold with w/log^2(scale*w) < 2C, the other needs
    w < min(2C*log_cap^2, threshold).
    """
    ctx = interval_context()
    low = w_lower_bound(ctx, 4**e)
    w0 = interval_max(ctx, threshold, low)
    log_branch = compare("log branch: w/log^2(%dw) < 2C at the least admissible w" % scale,
                         w0 / ctx.ln(scale * w0) ** 2, 2 * constant)
    cap_branch = compare("capped branch: N/(mu_x+mu_z) < min(2C*cap^2, threshold)",
                         low, _interval_min(ctx, 2 * constant * log_cap**2, threshold))
    checks = [prefactor_check, log_branch, cap_branch]
    ruled_out = prefactor_check.verdict == Verdict.HOLDS and all(
        c.verdict == Verdict.FAILS for c in (log_branch, cap_branch)
    )
    notes = []
    if prefactor_check.verdict != Verdict.HOLDS:
        notes.append("prefactor estimate not certified; the case is left open")
    result = Compatibility.INCOMPATIBLE if ruled_out else Compatibility.COMPATIBLE
    logger.info("%s at e=%d: %s", case, e, result.value)
    return CaseReport(case=case, e=e, result=result, checks=checks, notes=notes)


def padic_y_constant(ctx, e: int):
    return ctx.mpf("36.1") * ctx.ln(ctx.mpf(4**e + 1)) / ((2 * e) ** 2 * ctx.ln(ctx.mpf(2)) ** 3)


def padic_x_constant(ctx, e: int):
    return ctx.mpf("36.1") * 3 * ctx.ln(ctx.mpf(4**e + 1)) / (4 * ctx.ln(ctx.mpf(3)) ** 3)


def resolve_padic_y_case(e: int) -> CaseReport:
    """Can y >= w/2 survive the 2-adic bound at this e?"""
    if e < 2:
        raise InvariantViolationError("the 2-adic resolution assumes e > 1")
    ctx = interval_context()
    mu_x, _, mu_z = growth_ratios(ctx, 4**e)
    prefactor = compare("(mu_x+mu_z)*exp(0.4) < 3", (mu_x + mu_z) * ctx.exp(ctx.mpf("0.4")), ctx.mpf(3))
    log_cap = 12 * e * ctx.ln(ctx.mpf(2))
    threshold = ctx.mpf(2) ** (12 * e) / 3
    return _resolve("padic_y", e, prefactor, padic_y_constant(ctx, e), threshold, 3, log_cap)


def resolve_padic_x_case(e: int) -> CaseReport:
    """Can x >= w/2 survive the 3-adic bound at this e?"""
    if e < 2:
        raise InvariantViolationError("the 3-adic resolution assumes e > 1")
    ctx = interval_context()
    _, mu_y, mu_z = growth_ratios(ctx, 4**e)
    log3 = ctx.ln(ctx.mpf(3))
    prefactor = compare("exp(0.4)*(mu_z+2*log(3)*mu_y) < 5", ctx.exp(ctx.mpf("0.4")) * (mu_z + 2 * log3 * mu_y), ctx.mpf(5))
    threshold = ctx.mpf(3) ** 12 / 5
    return _resolve("padic_x", e, prefactor, padic_x_constant(ctx, e), threshold, 5, 12 * log3)


def _s_rhs(ctx, s: int, e: int):
    N = 4**e
    log_c, log_d = ctx.ln(ctx.mpf(N + 1)), ctx.ln(ctx.mpf(N + 2))
    inner = interval_max(ctx, ctx.ln(ctx.mpf(2 * s)) + ctx.mpf("0.38"), ctx.mpf(10))
    return ctx.mpf("50.4") * inner**2 + 2 * ctx.ln(ctx.mpf(6)) / (log_c * log_d)


@lru_cache(maxsize=None)
def solve_s_threshold_report(e: int, precision: Optional[int] = None) -> ThresholdReport:
    ctx = interval_context(precision)

    def violated(s: int) -> bool:
        return certainly_at_least(ctx.mpf(s), _s_rhs(ctx, s, e))

    if not violated(S_SEARCH_CEILING):
        raise InvariantViolationError(f"no crossing below {S_SEARCH_CEILING}")
    lo, hi = 1, S_SEARCH_CEILING
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if violated(mid):
            hi = mid
        else:
            lo = mid
    threshold = hi
    # the right side has slope 100.8*max(log(2s)+0.38, 10)/s, decreasing past the crossing
    slope = ctx.mpf("100.8") * interval_max(ctx, ctx.ln(ctx.mpf(2 * threshold)) + ctx.mpf("0.38"), ctx.mpf(10)) / threshold
    unique = certainly_less(slope, ctx.mpf(1))
    return ThresholdReport(
        e=e, threshold=threshold, rhs_at_threshold=to_model(_s_rhs(ctx, threshold, e)),
        crossing_unique=unique, precision=ctx.prec,
    )


def solve_s_threshold(e: int) -> int:
    """Least S such that every s >= S violates s < 50.4(max{log 2s + 0.38, 10})^2 + 2 log 6/(log c log d)."""
    if e < 1:
        raise InvariantViolationError("e must be positive")
    report = solve_s_threshold_report(e)
    if not report.crossing_unique:
        raise InvariantViolationError(f"crossing at {report.threshold} is not certified unique")
    return report.threshold


def rational_case_check(e: int):
    """N/(mu_x+mu_z) < S(e) * log(N+1), the condition that keeps e possible."""
    ctx = interval_context()
    N = 4**e
    return compare("N/(mu_x+mu_z) < S*log(N+1)", w_lower_bound(ctx, N), solve_s_threshold(e) * ctx.ln(ctx.mpf(N + 1)))


def resolve_rational_case(cap: Optional[int] = None) -> int:
    """Largest e <= cap still compatible with the rational bound."""
    cap = cap or settings.PROOF_E_CAP
    compatible = [e for e in range(1, cap + 1) if rational_case_check(e).verdict != Verdict.FAILS]
    if not compatible:
        raise InvariantViolationError("no e is compatible, which contradicts the e = 1 solutions")
    return max(compatible)


def padic_y_params(e: int, b1: int = 1, b2: int = 1) -> BakerPadicParams:
    """2-adic parameters for nu_2((4^e+1)^b1 - (1-4^e)^b2).

    At e = 1 the choice E = 2 violates E > 2, so g = 2, E = 3 is used.
    """
    if e == 1:
        return BakerPadicParams(p=2, alpha1=5, alpha2=-3, g=2, E=3, H1=LogTerm(scale=3, argument=2),
                                H2=LogTerm(scale=3, argument=2), b1=b1, b2=b2)
    return BakerPadicParams(p=2, alpha1=4**e + 1, alpha2=1 - 4**e, g=1, E=2 * e,
                            H1=LogTerm(argument=4**e + 1), H2=LogTerm(scale=2 * e, argument=2), b1=b1, b2=b2)


def padic_x_params(e: int, b1: int = 1, b2: int = 1) -> BakerPadicParams:
    """3-adic parameters for nu_3((-4^e-1)^b1 - (-2)^b2)."""
    H1 = LogTerm(scale=2, argument=3) if e == 1 else LogTerm(argument=4**e + 1)
    return BakerPadicParams(p=3, alpha1=-(4**e) - 1, alpha2=-2, g=3, E=2, H1=H1,
                            H2=LogTerm(scale=2, argument=3), b1=b1, b2=b2)


def padic_case_constants(e: int) -> List[ConstantComparison]:
    """Compare 36.1 g H1 H2 / (E^3 log^4 p) with the printed constant for both cases."""
    if e < 2:
        raise InvariantViolationError("the printed constants are stated for e > 1")
    ctx = interval_context()
    comparisons = []
    for case, params, printed in (
        ("padic_y", padic_y_params(e), padic_y_constant(ctx, e)),
        ("padic_x", padic_x_params(e), padic_x_constant(ctx, e)),
    ):
        log_p = ctx.ln(ctx.mpf(params.p))
        E = exact(ctx, params.E)
        general = ctx.mpf("36.1") * params.g * log_term(ctx, params.H1) * log_term(ctx, params.H2) / (E**3 * log_p**4)
        agree = not certainly_less(general, printed) and not certainly_less(printed, general)
        comparisons.append(ConstantComparison(
            case=case, e=e, general_prefactor=to_model(general), printed_prefactor=to_model(printed), agree=agree,
        ))
    return comparisons


def valuation_chain_check(e: int, solution: Tuple[int, int, int, int]) -> ValuationChainReport:
    """min{y,w} <= nu_2((4^e+1)^z - (1-4^e)^x) and min{x,w} <= nu_3((-4^e-1)^z - (-2)^(2ey)), plus both bounds."""
    x, y, z, w = solution
    N = 4**e
    two_adic = padic_valuation((N + 1) ** z - (1 - N) ** x, 2)
    three_adic = padic_valuation((-N - 1) ** z - (-2) ** (2 * e * y), 3)
    checks = [
        ValuationCheck(label="2-adic", expression=f"({N + 1})^{z} - ({1 - N})^{x}",
                       valuation=two_adic, required=min(y, w), holds=two_adic >= min(y, w)),
        ValuationCheck(label="3-adic", expression=f"({-N - 1})^{z} - (-2)^{2 * e * y}",
                       valuation=three_adic, required=min(x, w), holds=three_adic >= min(x, w)),
    ]
    bounds = [padic_bound(padic_y_params(e, z, x)), padic_bound(padic_x_params(e, z, 2 * e * y))]
    respected = bounds[0].interval.lower >= two_adic and bounds[1].interval.lower >= three_adic
    return ValuationChainReport(e=e, solution=list(solution), checks=checks, bounds=bounds, bounds_respected=respected)


def s_threshold_ceiling(e_values: range) -> int:
    return max(solve_s_threshold(e) for e in e_values)


def bound_summary(e: int) -> Dict[str, object]:
    """Everything the CLI prints for one e."""
    summary: Dict[str, object] = {"e": e, "s_threshold": solve_s_threshold(e)}
    if e >= 2:
        summary["padic_y"] = resolve_padic_y_case(e).result.value
        summary["padic_x"] = resolve_padic_x_case(e).result.value
    summary["rational"] = rational_case_check(e).verdict.value
    return summary
