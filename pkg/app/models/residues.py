from enum import Enum
from functools import cached_property
from math import lcm
from typing import Dict, List, NamedTuple, Optional, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ConstraintKind(str, Enum):
    FIXED = "fixed"
    CONGRUENCE = "congruence"
    LOWER = "lower"
    UPPER = "upper"
    PARITY = "parity"
    EXCLUDE = "exclude"


class Constraint(BaseModel):
    """One restriction on one exponent variable.

    ``value`` is the fixed value, the bound, the excluded value, the residue
    (congruence) or 1/0 for odd/even (parity).
    """
    model_config = ConfigDict(frozen=True)

    var: str
    kind: ConstraintKind
    value: int
    modulus: Optional[int] = None

    @model_validator(mode="before")
    @classmethod
    def _reduce_residue(cls, data):
        if isinstance(data, dict) and data.get("kind") in (ConstraintKind.CONGRUENCE, "congruence"):
            modulus = data.get("modulus")
            if not isinstance(modulus, int) or modulus < 1:
                raise ValueError("a congruence needs a positive modulus")
            data = {**data, "value": int(data["value"]) % modulus}
        return data

    @model_validator(mode="after")
    def _check_modulus(self):
        if self.kind == ConstraintKind.PARITY and self.value not in (0, 1):
            raise ValueError("parity value is 1 (odd) or 0 (even)")
        return self

    def admits(self, t: int) -> bool:
        if self.kind == ConstraintKind.FIXED:
            return t == self.value
        if self.kind == ConstraintKind.LOWER:
            return t >= self.value
        if self.kind == ConstraintKind.UPPER:
            return t <= self.value
        if self.kind == ConstraintKind.EXCLUDE:
            return t != self.value
        modulus, residue = self.congruence
        return t % modulus == residue

    @property
    def congruence(self) -> Tuple[int, int]:
        """(modulus, residue) for parity and congruence constraints."""
        if self.kind == ConstraintKind.PARITY:
            return 2, self.value
        return self.modulus, self.value

    def describe(self) -> str:
        if self.kind == ConstraintKind.FIXED:
            return f"{self.var}={self.value}"
        if self.kind == ConstraintKind.LOWER:
            return f"{self.var}>={self.value}"
        if self.kind == ConstraintKind.UPPER:
            return f"{self.var}<={self.value}"
        if self.kind == ConstraintKind.EXCLUDE:
            return f"{self.var}!={self.value}"
        if self.kind == ConstraintKind.PARITY:
            return f"{self.var} {'odd' if self.value else 'even'}"
        return f"{self.var}≡{self.value} mod {self.modulus}"


class ConstraintSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    constraints: List[Constraint] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_consistent(self):
        for var in self.variables:
            fixed = {c.value for c in self.for_var(var) if c.kind == ConstraintKind.FIXED}
            if len(fixed) > 1:
                raise ValueError(f"{var} is fixed to several values {sorted(fixed)}")
            for value in fixed:
                if not self.admits_value(var, value):
                    raise ValueError(f"{var}={value} contradicts the other constraints on {var}")
        return self

    @property
    def variables(self) -> List[str]:
        seen: List[str] = []
        for c in self.constraints:
            if c.var not in seen:
                seen.append(c.var)
        return seen

    def for_var(self, var: str) -> List[Constraint]:
        return [c for c in self.constraints if c.var == var]

    def admits_value(self, var: str, t: int) -> bool:
        return all(c.admits(t) for c in self.for_var(var))

    def admits(self, assignment: Dict[str, int]) -> bool:
        return all(c.admits(assignment[c.var]) for c in self.constraints if c.var in assignment)

    def fixed(self, var: str) -> Optional[int]:
        return next((c.value for c in self.for_var(var) if c.kind == ConstraintKind.FIXED), None)

    def lower(self, var: str) -> int:
        """Least admissible value ignoring congruences (exponents start at 1)."""
        return max([1] + [c.value for c in self.for_var(var) if c.kind in (ConstraintKind.LOWER, ConstraintKind.FIXED)])

    def upper(self, var: str) -> Optional[int]:
        bounds = [c.value for c in self.for_var(var) if c.kind in (ConstraintKind.UPPER, ConstraintKind.FIXED)]
        return min(bounds) if bounds else None

    def congruences(self, var: str) -> List[Tuple[int, int]]:
        return [c.congruence for c in self.for_var(var) if c.kind in (ConstraintKind.CONGRUENCE, ConstraintKind.PARITY)]

    def excluded(self, var: str) -> Set[int]:
        return {c.value for c in self.for_var(var) if c.kind == ConstraintKind.EXCLUDE}

    def pinned(self, var: str) -> bool:
        return self.upper(var) is not None

    def merged(self, other: "ConstraintSet") -> "ConstraintSet":
        combined = list(self.constraints)
        combined += [c for c in other.constraints if c not in combined]
        return ConstraintSet(constraints=combined)

    def describe(self) -> List[str]:
        return [c.describe() for c in self.constraints]


class EventuallyPeriodicSequence(BaseModel):
    """base^t mod modulus for t >= 1: preperiod first, then the cycle repeats."""
    model_config = ConfigDict(frozen=True)

    base: int
    modulus: int
    preperiod: List[int]
    cycle: List[int]

    @field_validator("cycle")
    @classmethod
    def _nonempty(cls, cycle):
        if not cycle:
            raise ValueError("cycle must be nonempty")
        return cycle

    @property
    def preperiod_length(self) -> int:
        return len(self.preperiod)

    @property
    def period(self) -> int:
        return len(self.cycle)

    def value(self, t: int) -> int:
        if t < 1:
            raise ValueError("exponents start at 1")
        if t <= self.preperiod_length:
            return self.preperiod[t - 1]
        return self.cycle[(t - self.preperiod_length - 1) % self.period]


class Slot(NamedTuple):
    """An explicit exponent (explicit=True) or a residue class of exponents above the threshold."""
    explicit: bool
    value: int


class ResidueClassSystem(BaseModel):
    """Exponent tuples surviving a sieve.

    For variable i an exponent t <= thresholds[i] is listed explicitly; larger
    exponents are grouped by t mod moduli[i].
    """
    model_config = ConfigDict(frozen=True)

    variables: List[str]
    moduli: List[int]
    thresholds: List[int]
    entries: Tuple[Tuple[Slot, ...], ...] = ()

    @field_validator("entries")
    @classmethod
    def _canonical(cls, entries):
        return tuple(sorted(set(entries)))

    @model_validator(mode="after")
    def _check_slots(self):
        width = len(self.variables)
        if len(self.moduli) != width or len(self.thresholds) != width:
            raise ValueError("moduli and thresholds need one value per variable")
        for entry in self.entries:
            if len(entry) != width:
                raise ValueError(f"entry {entry} does not match variables {self.variables}")
            for slot, modulus, threshold in zip(entry, self.moduli, self.thresholds):
                if slot.explicit and not 1 <= slot.value <= threshold:
                    raise ValueError(f"explicit exponent {slot.value} outside 1..{threshold}")
                if not slot.explicit and not 0 <= slot.value < modulus:
                    raise ValueError(f"residue {slot.value} outside 0..{modulus - 1}")
        return self

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def is_empty(self) -> bool:
        return not self.entries

    @property
    def classes(self) -> Set[Tuple[int, ...]]:
        """Entries in which every variable sits in a residue class."""
        return {tuple(s.value for s in e) for e in self.entries if not any(s.explicit for s in e)}

    @property
    def small_values(self) -> Dict[str, List[int]]:
        values: Dict[str, Set[int]] = {v: set() for v in self.variables}
        for entry in self.entries:
            for var, slot in zip(self.variables, entry):
                if slot.explicit:
                    values[var].add(slot.value)
        return {v: sorted(vals) for v, vals in values.items()}

    @cached_property
    def entry_set(self) -> Set[Tuple[Slot, ...]]:
        return set(self.entries)

    def slot_for(self, index: int, t: int) -> Slot:
        if t <= self.thresholds[index]:
            return Slot(True, t)
        return Slot(False, t % self.moduli[index])

    def contains(self, assignment: Dict[str, int]) -> bool:
        key = tuple(self.slot_for(i, assignment[v]) for i, v in enumerate(self.variables))
        return key in self.entry_set

    def explicit_bound(self, var: str) -> Optional[int]:
        """Largest surviving value of var if var is explicit in every entry."""
        i = self.variables.index(var)
        if not self.entries or any(not e[i].explicit for e in self.entries):
            return None
        return max(e[i].value for e in self.entries)

    def period_lcm(self) -> int:
        return lcm(*self.moduli)


class OutcomeKind(str, Enum):
    NO_SOLUTION = "no_solution"
    EXPONENT_BOUND = "exponent_bound"
    SURVIVORS = "survivors"


class ChainStep(BaseModel):
    modulus: int
    kind: OutcomeKind
    entries: int
    all_class_entries: int
    periods: List[int]


class SieveOutcome(BaseModel):
    """Result of one sieve or of a chain; ``moduli`` lists every modulus applied."""
    kind: OutcomeKind
    moduli: List[int]
    variable: Optional[str] = None
    bound: Optional[int] = None
    survivors: Optional[ResidueClassSystem] = None
    steps: List[ChainStep] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_variant(self):
        if not self.moduli:
            raise ValueError("an outcome names the modulus establishing it")
        if self.kind == OutcomeKind.EXPONENT_BOUND and (self.variable is None or self.bound is None):
            raise ValueError("an exponent bound names its variable and bound")
        if self.kind == OutcomeKind.SURVIVORS and (self.survivors is None or self.survivors.is_empty):
            raise ValueError("survivors must be nonempty")
        return self

    @property
    def modulus(self) -> int:
        return self.moduli[-1]

    @property
    def certified(self) -> bool:
        return self.kind != OutcomeKind.SURVIVORS

    def summary(self) -> str:
        if self.kind == OutcomeKind.NO_SOLUTION:
            return f"no solution (M={self.modulus})"
        if self.kind == OutcomeKind.EXPONENT_BOUND:
            return f"{self.variable} <= {self.bound} (M={self.modulus})"
        return f"{self.survivors.size} surviving entries (M={self.modulus})"
