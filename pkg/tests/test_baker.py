import math
import random
from fractions import Fraction

import pytest

from app.core.errors import InvariantViolationError
from app.models import BakerPadicParams, BakerRationalParams, BoundKind, Compatibility, LogTerm, Verdict
from app.services.baker_service import (
    bound_summary,
    height_term,
    log_height,
    multiplicatively_independent,
    padic_bound,
    padic_case_constants,
    padic_valuation,
    padic_x_params,
    padic_y_params,
    rational_bound,
    rational_case_check,
    resolve_padic_x_case,
    resolve_padic_y_case,
    resolve_rational_case,
    s_threshold_ceiling,
    solve_s_threshold,
    solve_s_threshold_report,
    valuation_chain_check,
)


def test_padic_valuation():
    """Test exact valuations of integers and fractions."""
    assert padic_valuation(152, 2) == 3
    assert padic_valuation(-189, 3) == 3
    assert padic_valuation(Fraction(9, 8), 2) == -3
    assert padic_valuation(7, 2) == 0


def test_valuation_of_zero():
    """Test that zero has no valuation."""
    with pytest.raises(InvariantViolationError):
        padic_valuation(0, 2)


def test_height():
    """Test the height of reduced fractions."""
    assert height_term(Fraction(-5, 3)).argument == 5
    assert log_height(Fraction(-5, 3)) == pytest.approx(math.log(5))
    assert log_height(Fraction(2, 7)) == pytest.approx(math.log(7))


def test_log_term_comparison():
    """Test the exact comparison of scaled logarithms."""
    assert LogTerm(scale=3, argument=2).dominates(LogTerm(argument=8))
    assert not LogTerm(argument=5).dominates(LogTerm(scale=3, argument=2))


def test_multiplicative_independence():
    """Test independence on dependent and independent pairs."""
    assert multiplicatively_independent(Fraction(5), Fraction(-3))
    assert not multiplicatively_independent(Fraction(4), Fraction(8))
    assert not multiplicatively_independent(Fraction(4), Fraction(-4))
    assert multiplicatively_independent(Fraction(6), Fraction(10))


def test_padic_params_reject_small_E():
    """E must exceed 1 + 1/(p-1), so E = 2 is out for p = 2."""
    params = BakerPadicParams(
        p=2, alpha1=5, alpha2=-3, g=1, E=2,
        H1=LogTerm(scale=3, argument=2), H2=LogTerm(scale=3, argument=2), b1=1, b2=1,
    )
    with pytest.raises(InvariantViolationError):
        padic_bound(params)


def test_padic_params_reject_nonunit():
    """Test that a base divisible by p is rejected."""
    params = BakerPadicParams(
        p=3, alpha1=6, alpha2=-2, g=3, E=2,
        H1=LogTerm(scale=2, argument=3), H2=LogTerm(scale=2, argument=3), b1=1, b2=1,
    )
    with pytest.raises(InvariantViolationError):
        padic_bound(params)


def test_padic_bound_positive():
    """Test the 2-adic bound at e = 1."""
    report = padic_bound(padic_y_params(1))
    assert report.kind == BoundKind.PADIC
    assert report.interval.lower <= report.bound_value
    assert report.bound_value > 100


def test_family_params_are_valid():
    """Test that the family parameters pass every precondition."""
    for e in (1, 2, 5, 8):
        padic_bound(padic_y_params(e))
        padic_bound(padic_x_params(e))


def test_rational_bound():
    """Test the rational bound on the constant 10 branch."""
    params = BakerRationalParams(alpha1=5, alpha2=6, H1=LogTerm(argument=5), H2=LogTerm(argument=6), b1=1, b2=1)
    report = rational_bound(params)
    assert report.kind == BoundKind.RATIONAL
    assert report.regime == "constant 10 branch"
    assert report.bound_value == pytest.approx(25.2 * math.log(5) * math.log(6) * 100, rel=1e-6)


def test_rational_params_reject_base_one():
    """Test that a base of 1 is rejected."""
    params = BakerRationalParams(alpha1=1, alpha2=6, H1=LogTerm(argument=5), H2=LogTerm(argument=6), b1=1, b2=1)
    with pytest.raises(InvariantViolationError):
        rational_bound(params)


def test_rational_params_reject_dependent():
    """Test that 4 and 8 are rejected as dependent."""
    params = BakerRationalParams(alpha1=4, alpha2=8, H1=LogTerm(argument=4), H2=LogTerm(argument=8), b1=1, b2=1)
    with pytest.raises(InvariantViolationError):
        rational_bound(params)


def test_s_threshold():
    """Test the S threshold at both ends of 1..8."""
    assert solve_s_threshold(1) == 5042
    assert solve_s_threshold(8) == 5041
    assert s_threshold_ceiling(range(1, 9)) == 5042


def test_s_threshold_is_monotone():
    """Test that S does not grow with e."""
    values = [solve_s_threshold(e) for e in range(1, 9)]
    assert values == sorted(values, reverse=True)


def test_s_threshold_report():
    """Test the threshold report fields."""
    report = solve_s_threshold_report(1)
    assert report.crossing_unique
    assert report.rhs_at_threshold.upper <= report.threshold


def test_rational_case():
    """Test that the rational case stops at e = 8."""
    assert resolve_rational_case() == 8
    assert rational_case_check(9).verdict == Verdict.FAILS
    assert rational_case_check(8).verdict != Verdict.FAILS


def test_padic_cases_at_boundary():
    """Test both p-adic cases on either side of e = 8."""
    assert resolve_padic_y_case(8).result == Compatibility.COMPATIBLE
    assert resolve_padic_x_case(8).result == Compatibility.COMPATIBLE
    assert resolve_padic_y_case(9).result == Compatibility.INCOMPATIBLE
    assert resolve_padic_x_case(9).result == Compatibility.INCOMPATIBLE


def test_padic_cases_ruled_out_up_to_cap():
    """Test that both p-adic cases fail for e in 9..64."""
    for e in range(9, 65):
        assert resolve_padic_y_case(e).result == Compatibility.INCOMPATIBLE
        assert resolve_padic_x_case(e).result == Compatibility.INCOMPATIBLE


def test_padic_case_needs_e_above_one():
    """Test that e = 1 is outside the 2-adic resolution."""
    with pytest.raises(InvariantViolationError):
        resolve_padic_y_case(1)


def test_printed_constants_agree():
    """Test the general prefactor against the printed constants."""
    for e in (2, 5, 8, 20):
        assert all(c.agree for c in padic_case_constants(e))


def test_valuation_chain_for_known_solutions():
    """Test the valuation chain at both known solutions."""
    report = valuation_chain_check(1, (3, 3, 3, 3))
    assert report.holds
    assert [c.valuation for c in report.checks] == [3, 3]
    assert report.bounds_respected

    report = valuation_chain_check(1, (3, 1, 1, 2))
    assert report.holds
    assert [c.valuation for c in report.checks] == [5, 2]
    assert [c.required for c in report.checks] == [1, 2]


def test_bound_summary():
    """Test the summary above and at the boundary."""
    summary = bound_summary(9)
    assert summary["padic_y"] == "incompatible"
    assert summary["rational"] == "fails"
    assert "padic_y" not in bound_summary(1)


def test_padic_bound_is_linear_in_g():
    """Doubling g doubles the bound when the valuation conditions still hold."""
    params = padic_y_params(2)
    base = padic_bound(params)
    doubled = padic_bound(params.model_copy(update={"g": 2}))
    assert doubled.bound_value == pytest.approx(2 * base.bound_value, rel=1e-12)


def test_padic_bound_linear_branch():
    """With b1 = b2 = 1 the 3-adic bound at e = 9 sits on the 6E log p branch."""
    report = padic_bound(padic_x_params(9))
    assert report.regime == "6E log p branch"
    prefactor = 36.1 * 3 * math.log(4**9 + 1) / (4 * math.log(3) ** 3)
    assert report.bound_value == pytest.approx(prefactor * (12 * math.log(3)) ** 2, rel=1e-9)


def test_padic_bound_is_monotone():
    """Raising b1, b2 or the heights never lowers the 2-adic bound."""
    rng = random.Random(11)
    for _ in range(40):
        b1, b2 = rng.randint(1, 10**12), rng.randint(1, 10**12)
        params = padic_y_params(3, b1, b2)
        value = padic_bound(params).bound_value
        larger_b = padic_y_params(3, b1 + rng.randint(0, 10**12), b2 + rng.randint(1, 10**12))
        assert padic_bound(larger_b).bound_value >= value
        scale = Fraction(rng.randint(11, 30), 10)
        larger_h = params.model_copy(update={"H1": LogTerm(scale=scale, argument=params.H1.argument)})
        assert padic_bound(larger_h).bound_value >= value


def test_rational_bound_is_monotone():
    """Raising b1 or H2 never lowers the rational bound."""
    rng = random.Random(12)
    for _ in range(40):
        b1, b2 = rng.randint(1, 10**12), rng.randint(1, 10**12)
        params = BakerRationalParams(alpha1=5, alpha2=6, H1=LogTerm(argument=5), H2=LogTerm(argument=6), b1=b1, b2=b2)
        value = rational_bound(params).bound_value
        larger_b = params.model_copy(update={"b1": b1 + rng.randint(1, 10**12)})
        assert rational_bound(larger_b).bound_value >= value
        larger_h = params.model_copy(update={"H2": LogTerm(argument=rng.randint(7, 1000))})
        assert rational_bound(larger_h).bound_value >= value


def test_higher_precision_never_raises_the_bound():
    """Each report is an upper bound, and more bits only tighten it."""
    for report, sharper in (
        (padic_bound(padic_y_params(5, 7, 3)), padic_bound(padic_y_params(5, 7, 3), precision=256)),
        (padic_bound(padic_x_params(4, 10**6, 3)), padic_bound(padic_x_params(4, 10**6, 3), precision=256)),
    ):
        assert sharper.precision == 256
        assert sharper.bound_value <= report.bound_value
        assert sharper.interval.lower >= report.interval.lower


def test_rational_bound_switches_branch():
    """Scaling b1, b2 by 10^6 pushes log b' + 0.38 past 10."""
    small = BakerRationalParams(alpha1=5, alpha2=6, H1=LogTerm(argument=5), H2=LogTerm(argument=6), b1=1, b2=2)
    assert rational_bound(small).regime == "constant 10 branch"
    large = small.model_copy(update={"b1": 10**6, "b2": 2 * 10**6})
    report = rational_bound(large)
    assert report.regime == "log b' branch"
    b_prime = 10**6 / math.log(6) + 2 * 10**6 / math.log(5)
    expected = 25.2 * math.log(5) * math.log(6) * (math.log(b_prime) + 0.38) ** 2
    assert report.bound_value == pytest.approx(expected, rel=1e-9)
