import math

import pytest

from app.core.errors import InvalidEquationError, PipelineStageError
from app.models import OutcomeKind
from app.services import casework_service
from app.services.casework_service import (
    build_deduction_trace,
    certified_w_bound,
    check_mod3_exclusion,
    check_power_of_four_structure,
    check_w_lower_bound,
    derive_parity_constraints,
    exceptional_solution_search,
    full_theorem_pipeline,
    lemma_mod4e2_exception_loop,
    lemma_wge4e_growth_loop,
    lemma_wge4e_small_e_checks,
    replay_table1,
    replay_table2,
    special_case_solutions,
    table2_coverage,
)
from app.services.equation_service import brute_force_solutions, family_equation, shifted_equation
from app.services.parsing import parse_constraints


def test_mod3_exclusion():
    """Test the mod 3 exclusion for N not divisible by 3."""
    assert check_mod3_exclusion(8)
    assert check_mod3_exclusion(2)
    assert not check_mod3_exclusion(4)
    assert not check_mod3_exclusion(256)


def test_mod3_exclusion_rejects_small_n():
    """Test that N below 2 is invalid."""
    with pytest.raises(InvalidEquationError):
        check_mod3_exclusion(1)


def test_power_of_four_structure():
    """Test the structure scan up to 64."""
    report = check_power_of_four_structure(64)
    assert report.verified
    assert report.detail["powers_of_four"] == [4, 16, 64]
    assert report.checked == 16


def test_deduction_e1():
    """Test the constraints derived at e = 1."""
    instance, _ = family_equation(1)
    constraints = derive_parity_constraints(instance)
    assert constraints.describe() == ["x odd", "y odd", "z odd", "x≡1 mod 2", "x>=3", "y>=3", "w>=3"]
    assert constraints.admits({"x": 3, "y": 3, "z": 3, "w": 3})


def test_w_step_at_e1_accounts_for_w2():
    """At e = 1 the bound only gives w >= 2; the w = 2 leftover is the special solution alone."""
    instance, _ = family_equation(1)
    step = build_deduction_trace(instance).steps[4]
    assert (step.lemma, step.claim) == ("w_lower", "w >= 3")
    assert step.verified
    assert step.detail["w2_solutions"] == [{"x": 3, "y": 1, "z": 1, "w": 2}]

    instance, _ = family_equation(3)
    step = build_deduction_trace(instance).steps[4]
    assert step.claim == "w >= 7"
    assert step.verified
    assert "w2_solutions" not in step.detail


def test_deduction_e2():
    """Test the constraints derived at e = 2."""
    instance, _ = family_equation(2)
    described = derive_parity_constraints(instance).describe()
    assert "x≡1 mod 4" in described
    assert "x>=5" in described
    assert "w>=5" in described


def test_deduction_trace_details():
    """Test the order facts behind the x residue step."""
    instance, _ = family_equation(2)
    trace = build_deduction_trace(instance)
    assert not trace.failed
    assert [s.lemma for s in trace.steps] == ["x_odd", "y_odd", "x_residue", "z_odd", "w_lower", "y_ge_3"]
    residue = trace.steps[2]
    assert residue.detail["order"] == 8
    assert residue.detail["first_minus_one"] == 4


def test_w_lower_bound():
    """Test the rounded lower bound for w."""
    instance, _ = family_equation(1)
    assert 1.4 < check_w_lower_bound(instance) < 2.1
    instance, _ = family_equation(8)
    assert check_w_lower_bound(instance) > 32000


def test_growth_loop():
    """Test the growth loop pairs."""
    pairs = lemma_wge4e_growth_loop()
    assert (1, 3) in pairs
    assert all(e <= 4 and w <= 12 for e, w in pairs)


def test_exception_loop():
    """Test that only (1, 3) survives the exception loop."""
    assert lemma_mod4e2_exception_loop() == {(1, 3)}


def test_small_e_checks():
    """Test the small e checks up to 64."""
    report = lemma_wge4e_small_e_checks(64)
    assert report.verified
    assert report.detail["tail_decreasing"]
    assert report.checked == 60


def test_exceptional_search():
    """Test the exceptional solution search."""
    assert exceptional_solution_search() == {(1, 3, 3, 3, 3)}


def test_special_cases_match_brute_force():
    """Test the special cases against a 12-box search."""
    special = special_case_solutions()
    assert special == {(1, 3, 1, 1, 2), (1, 3, 3, 3, 3)}
    found = brute_force_solutions(shifted_equation(4), 12, workers=1)
    assert {(1, s["x"], s["y"], s["z"], s["w"]) for s in found} == special


def _exponent_box(N, w):
    # each term on the left is below (N+2)^w
    def top(base):
        return int(w * math.log(N + 2) / math.log(base)) + 1

    return {"x": top(N - 1), "y": top(N), "z": top(N + 1), "w": w}


def test_exceptional_search_matches_brute_force():
    """Same (e, w) ranges and congruence, found by plain box search."""
    found = set()
    for e in range(1, 5):
        N = 4**e
        for w in range(3 * e, min(4 * e - 1, 12) + 1):
            pinned = parse_constraints([f"w={w}"])
            for s in brute_force_solutions(shifted_equation(N), _exponent_box(N, w), pinned, workers=1):
                if s["x"] % 2 and s["z"] % 2 and (s["x"] + s["z"]) % N == 2 ** (w - 2 * e) % N:
                    found.add((e, s["x"], s["y"], s["z"], s["w"]))
    assert found == exceptional_solution_search()


def test_special_cases_over_wider_box():
    """Widening the box at (e, w) = (1, 2) and (1, 3) finds nothing new."""
    found = set()
    for w in (2, 3):
        box = {v: top + 5 for v, top in _exponent_box(4, w).items() if v != "w"}
        box["w"] = w
        pinned = parse_constraints([f"w={w}"])
        for s in brute_force_solutions(shifted_equation(4), box, pinned, workers=1):
            found.add((1, s["x"], s["y"], s["z"], s["w"]))
    assert found == special_case_solutions()


def test_table2_replay():
    """Test the four case rows."""
    rows = replay_table2()
    assert all(row.matches for row in rows)
    assert [row.outcome.bound for row in rows] == [1, 2, 1, 3]
    assert certified_w_bound(rows) == 3
    assert [s.entries for s in rows[3].outcome.steps] == [8, 42, 24, 18, 1]


def test_table2_coverage():
    """Test that the four cases cover every small exponent tuple."""
    report = table2_coverage()
    assert report.verified
    assert report.checked == 12


def test_table1_selected_rows():
    """Test the e = 2 and e = 3 rows."""
    rows = replay_table1(e_values=[2, 3])
    assert [row.e for row in rows] == [2, 3]
    assert all(row.matches for row in rows)
    assert all(row.outcome.kind == OutcomeKind.NO_SOLUTION for row in rows)


def test_table1_first_row_uses_case_split():
    """Test that the e = 1 row comes from the case split."""
    row, = replay_table1(e_values=[1], table2_rows=replay_table2())
    assert row.reproduced == "w<=3"
    assert row.matches
    assert row.outcome is None


@pytest.mark.slow
def test_table1_full():
    """Test every published row."""
    assert all(row.matches for row in replay_table1())


@pytest.mark.slow
def test_full_pipeline():
    """Test the full pipeline with reduced caps."""
    report = full_theorem_pipeline(structure_cap=64, proof_cap=16)
    assert report.solutions == [(3, 3, 1, 1, 2), (3, 3, 3, 3, 3)]
    assert [s.name for s in report.stages] == [
        "mod3", "structure", "deduction", "exceptional", "baker", "table2", "table1", "brute_force",
    ]
    assert report.stages[4].detail["rational_max_e"] == 8
    labels = [c.label for c in report.certificates]
    assert "table 1, e=2" in labels
    assert "s_threshold, e=1" in labels
    assert "timing" not in report.deterministic_dump()


def test_pipeline_stops_at_failed_stage(monkeypatch):
    """Test that a failing stage aborts the pipeline."""
    monkeypatch.setattr(casework_service, "lemma_mod4e2_exception_loop", lambda: {(1, 3), (2, 5)})
    with pytest.raises(PipelineStageError) as info:
        full_theorem_pipeline(structure_cap=16, proof_cap=16)
    assert info.value.stage == "exceptional"
