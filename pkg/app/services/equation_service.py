import logging
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from math import prod
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from ..core.config import settings
from ..core.errors import EmptySearchBoxError, InvalidEquationError, MissingAssignmentError
from ..models import Assignment, Constraint, ConstraintKind, ConstraintSet, ExpEquation, Factor, FamilyInstance, Term
from .rigorous import growth_ratios, interval_context

logger = logging.getLogger(__name__)


def evaluate(eq: ExpEquation, asg: Assignment) -> int:
    """Exact value of the signed sum; zero iff asg solves eq."""
    missing = [v for v in eq.variables if v not in asg]
    if missing:
        raise MissingAssignmentError(f"no value for {', '.join(missing)}")
    if any(asg[v] < 1 for v in eq.variables):
        raise InvalidEquationError("exponents are positive integers")
    total = 0
    for term in eq.terms:
        value = term.coefficient
        for f in term.factors:
            value *= f.base ** asg[f.var]
        total += value
    return total


def _power_tables(eq: ExpEquation, top: int) -> Dict[int, List[int]]:
    tables = {}
    for term in eq.terms:
        for f in term.factors:
            if f.base not in tables:
                tables[f.base] = [f.base**t for t in range(top + 1)]
    return tables


def _term_value(term: Term, values: Sequence[int], index: Dict[str, int], powers: Dict[int, List[int]]) -> int:
    value = term.coefficient
    for f in term.factors:
        value *= powers[f.base][values[index[f.var]]]
    return value


def _search(eq: ExpEquation, domains: List[List[int]]) -> List[Tuple[int, ...]]:
    variables = eq.variables
    last = len(variables) - 1
    index = {v: i for i, v in enumerate(variables)}
    powers = _power_tables(eq, max((d[-1] for d in domains if d), default=1))
    head = [t for t in eq.terms if variables[last] not in t.variables]
    tail = [t for t in eq.terms if variables[last] in t.variables]
    # tail terms of one sign make the sum monotone in the last exponent
    signs = {t.coefficient > 0 for t in tail}
    monotone = len(signs) == 1
    rising = signs == {True}
    found = []
    for prefix in product(*domains[:last]):
        rest = sum(_term_value(t, prefix, index, powers) for t in head)
        for t_last in domains[last]:
            values = prefix + (t_last,)
            total = rest + sum(_term_value(t, values, index, powers) for t in tail)
            if total == 0:
                found.append(values)
            elif monotone and (total > 0) == rising:
                break
    return found


def brute_force_solutions(
    eq: ExpEquation,
    bounds: Union[int, Dict[str, int]],
    constraints: Optional[ConstraintSet] = None,
    workers: Optional[int] = None,
) -> List[Assignment]:
    """Every solution in the box 1..bounds[v], in lexicographic order of eq.variables."""
    if isinstance(bounds, int):
        bounds = {v: bounds for v in eq.variables}
    if any(bounds.get(v, 0) < 1 for v in eq.variables):
        raise EmptySearchBoxError(f"every variable needs a bound >= 1, got {bounds}")
    constraints = constraints or ConstraintSet()
    domains = [
        [t for t in range(1, bounds[v] + 1) if constraints.admits_value(v, t)]
        for v in eq.variables
    ]
    if any(not d for d in domains):
        return []

    workers = workers or settings.WORKERS
    if workers > 1 and len(domains[0]) > 1 and len(eq.variables) > 1:
        slices = [[[t], *domains[1:]] for t in domains[0]]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            found = [s for part in pool.map(_search, [eq] * len(slices), slices) for s in part]
    else:
        found = _search(eq, domains)

    logger.info("brute force over %s found %d solutions", bounds, len(found))
    return [dict(zip(eq.variables, values)) for values in sorted(found)]


def _power_term(base: int, var: str, coefficient: int = 1) -> Term:
    if base == 1:
        return Term(coefficient=coefficient)
    return Term(coefficient=coefficient, factors=[Factor(base=base, var=var)])


def shifted_equation(N: int) -> ExpEquation:
    """(N-1)^x + N^y + (N+1)^z = (N+2)^w; for N = 2 the first term is the constant 1."""
    if N < 2:
        raise InvalidEquationError(f"N must be at least 2, got {N}")
    return ExpEquation(terms=[
        _power_term(N - 1, "x"),
        _power_term(N, "y"),
        _power_term(N + 1, "z"),
        _power_term(N + 2, "w", -1),
    ])


def family_equation(e: int) -> Tuple[FamilyInstance, ExpEquation]:
    if e < 1:
        raise InvalidEquationError(f"e must be at least 1, got {e}")
    N = 4**e
    mu_x, mu_y, mu_z = (float(mu.mid) for mu in growth_ratios(interval_context(), N))
    instance = FamilyInstance(
        e=e, N=N, a=N - 1, b=N, c=N + 1, d=N + 2, mu_x=mu_x, mu_y=mu_y, mu_z=mu_z,
    )
    return instance, shifted_equation(N)


def size_constraints(eq: ExpEquation) -> ConstraintSet:
    """Lower bounds for a lone single-power term that must outgrow the opposite side at exponent 1."""
    derived = []
    for sign in (1, -1):
        side = [t for t in eq.terms if (t.coefficient > 0) == (sign > 0)]
        if len(side) != 1 or len(side[0].factors) != 1:
            continue
        lone = side[0]
        var, base = lone.factors[0].var, lone.factors[0].base
        if len(eq.terms_with(var)) != 1 or lone.variables.count(var) != 1:
            continue
        smallest_other = sum(
            abs(t.coefficient) * prod(f.base for f in t.factors)
            for t in eq.terms if t is not lone
        )
        least = 1
        while abs(lone.coefficient) * base**least < smallest_other:
            least += 1
        if least > 1:
            derived.append(Constraint(var=var, kind=ConstraintKind.LOWER, value=least))
    return ConstraintSet(constraints=derived)


def equation_to_json(eq: ExpEquation) -> Dict[str, Any]:
    return {"terms": [t.model_dump(by_alias=True) for t in eq.terms]}


def equation_from_json(document: Dict[str, Any]) -> ExpEquation:
    try:
        return ExpEquation.model_validate(document)
    except ValidationError as exc:
        raise InvalidEquationError(exc.errors()[0]["msg"].removeprefix("Value error, ")) from exc
