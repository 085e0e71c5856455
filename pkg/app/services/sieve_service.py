import logging
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from math import lcm, prod
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from sympy import factorint, multiplicity, n_order

from ..core.config import settings
from ..core.errors import BudgetExceededError, ExpSieveError, InvalidEquationError, VariableMismatchError
from ..models import (
    ChainStep,
    ConstraintSet,
    EventuallyPeriodicSequence,
    ExpEquation,
    OutcomeKind,
    ResidueClassSystem,
    SieveOutcome,
    Slot,
)
from .equation_service import size_constraints
from .parsing import format_modulus

logger = logging.getLogger(__name__)

# primes missing from the caps contribute their first power only
DEFAULT_EXPONENT_CAPS: Dict[int, int] = {2: 2}


def residue_sequence(base: int, M: int) -> EventuallyPeriodicSequence:
    """Minimal preperiod/cycle representation of base^t mod M for t >= 1."""
    if base <= 1:
        raise InvalidEquationError(f"base must be greater than 1, got {base}")
    if M < 2:
        raise InvalidEquationError(f"modulus must be at least 2, got {M}")
    coprime_part = M
    vanishing_from = 0
    for p, k in factorint(M).items():
        v = multiplicity(p, base)
        if v:
            coprime_part //= p**k
            vanishing_from = max(vanishing_from, -(-k // v))
    preperiod_length = max(vanishing_from - 1, 0)
    period = n_order(base, coprime_part) if coprime_part > 1 else 1
    return EventuallyPeriodicSequence(
        base=base,
        modulus=M,
        preperiod=[pow(base, t, M) for t in range(1, preperiod_length + 1)],
        cycle=[pow(base, t, M) for t in range(preperiod_length + 1, preperiod_length + period + 1)],
    )


class VariableGrid(NamedTuple):
    """Slots of one variable under one modulus, with a representative exponent per slot."""
    var: str
    threshold: int
    period: int
    slots: List[Slot]
    representatives: List[int]


def variable_grid(eq: ExpEquation, var: str, M: int, constraints: ConstraintSet) -> VariableGrid:
    sequences = [residue_sequence(f.base, M) for t in eq.terms for f in t.factors if f.var == var]
    natural_threshold = max(s.preperiod_length for s in sequences)
    natural_period = lcm(*(s.period for s in sequences))

    def explicit(upto: int) -> List[int]:
        return [t for t in range(constraints.lower(var), upto + 1) if constraints.admits_value(var, t)]

    upper = constraints.upper(var)
    if upper is not None and (constraints.fixed(var) is not None or upper <= natural_threshold + natural_period):
        values = explicit(upper)
        return VariableGrid(var, upper, 1, [Slot(True, t) for t in values], values)

    period = lcm(natural_period, *(m for m, _ in constraints.congruences(var)))
    threshold = max([natural_threshold, constraints.lower(var) - 1, *constraints.excluded(var)])
    values = explicit(threshold)
    slots = [Slot(True, t) for t in values]
    representatives = list(values)
    for r in range(period):
        t = threshold + 1 + (r - threshold - 1) % period
        # every congruence modulus divides the period, so one representative decides the class
        if all(t % m == residue for m, residue in constraints.congruences(var)):
            slots.append(Slot(False, r))
            representatives.append(t)
    return VariableGrid(var, threshold, period, slots, representatives)


def _components(eq: ExpEquation) -> List[List[str]]:
    """Variables linked by sharing a term."""
    parent = {v: v for v in eq.variables}

    def find(v: str) -> str:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for term in eq.terms:
        names = term.variables
        for other in names[1:]:
            parent[find(other)] = find(names[0])
    groups: Dict[str, List[str]] = {}
    for v in eq.variables:
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def _component_table(
    eq: ExpEquation, names: List[str], grids: Dict[str, VariableGrid], M: int
) -> List[Tuple[int, Tuple[int, ...]]]:
    """(residue, slot indices) for every slot combination of one component."""
    position = {v: i for i, v in enumerate(names)}
    terms = [t for t in eq.terms if t.factors and t.factors[0].var in position]
    powers = {
        (f.base, f.var): [pow(f.base, rep, M) for rep in grids[f.var].representatives]
        for t in terms for f in t.factors
    }
    rows = []
    for combo in product(*(range(len(grids[v].slots)) for v in names)):
        residue = 0
        for term in terms:
            value = term.coefficient
            for f in term.factors:
                value = value * powers[(f.base, f.var)][combo[position[f.var]]] % M
            residue += value
        rows.append((residue % M, combo))
    return rows


def _split(sizes: List[int]) -> Tuple[List[int], List[int]]:
    """Greedy partition of component indices into two halves of similar product."""
    left, right = [], []
    left_size = right_size = 1
    for i in sorted(range(len(sizes)), key=lambda i: -sizes[i]):
        if left_size <= right_size:
            left.append(i)
            left_size *= sizes[i]
        else:
            right.append(i)
            right_size *= sizes[i]
    return left, right


def _combine(tables: List[List[Tuple[int, Tuple[int, ...]]]], M: int):
    for rows in product(*tables):
        yield sum(r for r, _ in rows) % M, tuple(combo for _, combo in rows)


def enumeration_cost(eq: ExpEquation, M: int, constraints: ConstraintSet) -> int:
    grids = {v: variable_grid(eq, v, M, constraints) for v in eq.variables}
    return _cost(eq, grids)


def _cost(eq: ExpEquation, grids: Dict[str, VariableGrid]) -> int:
    sizes = [prod(len(grids[v].slots) for v in names) for names in _components(eq)]
    left, right = _split(sizes)
    return prod(sizes[i] for i in left) + prod(sizes[i] for i in right)


def _survivors(eq: ExpEquation, M: int, grids: Dict[str, VariableGrid], budget: int) -> ResidueClassSystem:
    components = _components(eq)
    sizes = [prod(len(grids[v].slots) for v in names) for names in components]
    left, right = _split(sizes)
    estimated = prod(sizes[i] for i in left) + prod(sizes[i] for i in right)
    logger.debug("M=%d periods=%s estimated cost %d", M, {v: g.period for v, g in grids.items()}, estimated)
    if estimated > budget:
        raise BudgetExceededError(estimated, budget)

    tables = [_component_table(eq, names, grids, M) for names in components]
    constant = sum(t.coefficient for t in eq.terms if not t.factors) % M
    small, large = sorted((left, right), key=lambda half: prod(sizes[i] for i in half))
    lookup: Dict[int, List[Tuple]] = {}
    for residue, combos in _combine([tables[i] for i in small], M):
        lookup.setdefault(residue, []).append(combos)

    order = small + large
    entries = set()
    for residue, tail in _combine([tables[i] for i in large], M):
        for head in lookup.get((-constant - residue) % M, ()):
            chosen: Dict[str, Slot] = {}
            for component, combo in zip(order, head + tail):
                for name, k in zip(components[component], combo):
                    chosen[name] = grids[name].slots[k]
            entries.add(tuple(chosen[v] for v in eq.variables))
            if len(entries) > budget:
                raise BudgetExceededError(len(entries), budget)
    return ResidueClassSystem(
        variables=list(eq.variables),
        moduli=[grids[v].period for v in eq.variables],
        thresholds=[grids[v].threshold for v in eq.variables],
        entries=tuple(entries),
    )


def classify(system: ResidueClassSystem, moduli: List[int], constraints: ConstraintSet) -> SieveOutcome:
    """NoSolution, the tightest ExponentBound over unpinned variables, or Survivors."""
    if system.is_empty:
        return SieveOutcome(kind=OutcomeKind.NO_SOLUTION, moduli=moduli)
    bounds = [
        (bound, i, var)
        for i, var in enumerate(system.variables)
        if not constraints.pinned(var) and (bound := system.explicit_bound(var)) is not None
    ]
    if bounds:
        bound, _, var = min(bounds)
        return SieveOutcome(
            kind=OutcomeKind.EXPONENT_BOUND, moduli=moduli, variable=var, bound=bound, survivors=system,
        )
    return SieveOutcome(kind=OutcomeKind.SURVIVORS, moduli=moduli, survivors=system)


def _step(M: int, outcome_kind: OutcomeKind, system: ResidueClassSystem) -> ChainStep:
    return ChainStep(
        modulus=M,
        kind=outcome_kind,
        entries=system.size,
        all_class_entries=len(system.classes),
        periods=list(system.moduli),
    )


def surviving_system(
    eq: ExpEquation, M: int, constraints: Optional[ConstraintSet] = None, budget: Optional[int] = None
) -> ResidueClassSystem:
    constraints = constraints or ConstraintSet()
    grids = {v: variable_grid(eq, v, M, constraints) for v in eq.variables}
    return _survivors(eq, M, grids, budget or settings.ENUMERATION_BUDGET)


def sieve(
    eq: ExpEquation, M: int, constraints: Optional[ConstraintSet] = None, budget: Optional[int] = None
) -> SieveOutcome:
    """Reduce eq modulo M and keep the exponent slots whose combination vanishes."""
    if M < 2:
        raise InvalidEquationError(f"modulus must be at least 2, got {M}")
    constraints = constraints or ConstraintSet()
    system = surviving_system(eq, M, constraints, budget)
    outcome = classify(system, [M], constraints)
    outcome.steps.append(_step(M, outcome.kind, system))
    logger.info("sieve M=%s: %s", format_modulus(M), outcome.summary())
    return outcome


def _expand(system: ResidueClassSystem, thresholds: List[int], moduli: List[int]):
    """Rewrite every entry on a finer grid (larger thresholds, multiple periods)."""
    for entry in system.entries:
        options = []
        for slot, old_t, old_p, new_t, new_p in zip(entry, system.thresholds, system.moduli, thresholds, moduli):
            if slot.explicit:
                options.append([slot])
                continue
            first = old_t + 1 + (slot.value - old_t - 1) % old_p
            choices = [Slot(True, t) for t in range(first, new_t + 1, old_p)]
            choices += [Slot(False, slot.value + k * old_p) for k in range(new_p // old_p)]
            options.append(choices)
        yield from product(*options)


def _project(entry: Tuple[Slot, ...], system: ResidueClassSystem) -> Tuple[Slot, ...]:
    projected = []
    for slot, t, p in zip(entry, system.thresholds, system.moduli):
        if slot.explicit and slot.value <= t:
            projected.append(slot)
        else:
            projected.append(Slot(False, slot.value % p))
    return tuple(projected)


def _expansion_size(system: ResidueClassSystem, thresholds: List[int], moduli: List[int]) -> int:
    total = 0
    for entry in system.entries:
        count = 1
        for slot, old_t, old_p, new_t, new_p in zip(entry, system.thresholds, system.moduli, thresholds, moduli):
            if not slot.explicit:
                count *= new_p // old_p + max(0, new_t - old_t) // old_p + 1
        total += count
    return total


def intersect(r1: ResidueClassSystem, r2: ResidueClassSystem) -> ResidueClassSystem:
    """Exponent tuples allowed by both systems, on the common refinement of their grids."""
    if r1.variables != r2.variables:
        raise VariableMismatchError(f"cannot intersect {r1.variables} with {r2.variables}")
    thresholds = [max(a, b) for a, b in zip(r1.thresholds, r2.thresholds)]
    moduli = [lcm(a, b) for a, b in zip(r1.moduli, r2.moduli)]
    source, target = sorted((r1, r2), key=lambda s: _expansion_size(s, thresholds, moduli))
    keep = target.entry_set
    entries = [e for e in _expand(source, thresholds, moduli) if _project(e, target) in keep]
    return ResidueClassSystem(variables=list(r1.variables), moduli=moduli, thresholds=thresholds, entries=tuple(entries))


def sieve_chain(
    eq: ExpEquation, moduli: Sequence[int], constraints: Optional[ConstraintSet] = None, budget: Optional[int] = None
) -> SieveOutcome:
    """Sieve with each modulus in turn, intersecting survivors until a certificate appears."""
    if not moduli:
        raise InvalidEquationError("a chain needs at least one modulus")
    constraints = constraints or ConstraintSet()
    current: Optional[ResidueClassSystem] = None
    steps: List[ChainStep] = []
    applied: List[int] = []
    outcome = None
    for M in moduli:
        applied.append(M)
        system = surviving_system(eq, M, constraints, budget)
        current = system if current is None else intersect(current, system)
        outcome = classify(current, list(applied), constraints)
        steps.append(_step(M, outcome.kind, current))
        outcome.steps = list(steps)
        logger.info("chain step M=%s: %d entries, %d all-class", format_modulus(M), current.size, len(current.classes))
        if outcome.certified:
            break
    return outcome


def _try_candidate(eq: ExpEquation, M: int, constraints: ConstraintSet, budget: int) -> Optional[SieveOutcome]:
    try:
        return sieve(eq, M, constraints, budget)
    except ExpSieveError as exc:
        logger.warning("modulus %s skipped: %s", format_modulus(M), exc)
        return None


def candidate_moduli(
    prime_budget: Sequence[int], exponent_caps: Optional[Dict[int, int]] = None, limit: Optional[int] = None
) -> List[int]:
    caps = {**DEFAULT_EXPONENT_CAPS, **(exponent_caps or {})}
    choices = [[p**k for k in range(caps.get(p, 1) + 1)] for p in sorted(set(prime_budget))]
    candidates = sorted({prod(c) for c in product(*choices)} - {1})
    limit = limit or settings.MAX_CANDIDATES
    if len(candidates) > limit:
        logger.warning("%d candidate moduli, keeping the %d smallest", len(candidates), limit)
        candidates = candidates[:limit]
    return candidates


def auto_modulus_search(
    eq: ExpEquation,
    prime_budget: Sequence[int],
    exponent_caps: Optional[Dict[int, int]] = None,
    enumeration_budget: Optional[int] = None,
    constraints: Optional[ConstraintSet] = None,
    workers: Optional[int] = None,
    size_bounds: bool = True,
) -> List[Tuple[int, SieveOutcome]]:
    """Every certifying modulus built from the prime budget, cheapest enumeration first.

    With size_bounds the lower bounds from size_constraints are added, as for the
    published moduli; the caller's constraints take part either way.
    """
    if not prime_budget:
        raise InvalidEquationError("the prime budget is empty")
    constraints = constraints or ConstraintSet()
    if size_bounds:
        constraints = size_constraints(eq).merged(constraints)
    budget = enumeration_budget or settings.ENUMERATION_BUDGET
    ranked = sorted(
        ((enumeration_cost(eq, M, constraints), M) for M in candidate_moduli(prime_budget, exponent_caps)),
    )
    affordable = [M for cost, M in ranked if cost <= budget]
    if len(affordable) < len(ranked):
        logger.warning("%d candidate moduli exceed the enumeration budget", len(ranked) - len(affordable))

    workers = workers or settings.WORKERS
    if workers > 1 and affordable:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_try_candidate, *zip(*[(eq, M, constraints, budget) for M in affordable])))
    else:
        outcomes = [_try_candidate(eq, M, constraints, budget) for M in affordable]

    found = [(M, o) for M, o in zip(affordable, outcomes) if o is not None and o.certified]
    logger.info("auto modulus search: %d of %d candidates certify", len(found), len(affordable))
    return found
