from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field, model_validator

INT64_MAX = 2**63 - 1

# variable name -> exponent value (>= 1)
Assignment = Dict[str, int]


class Factor(BaseModel):
    model_config = ConfigDict(frozen=True)

    base: int
    var: str

    @model_validator(mode="after")
    def _check_base(self):
        if self.base <= 1:
            raise ValueError(f"base must be greater than 1, got {self.base}")
        return self


class Term(BaseModel):
    """coefficient * prod(base ** var); an empty factor list is a constant term."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    coefficient: int = Field(alias="coeff")
    factors: List[Factor] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_coefficient(self):
        if self.coefficient == 0:
            raise ValueError("coefficient must be nonzero")
        if abs(self.coefficient) > INT64_MAX:
            raise ValueError("coefficient must fit in a signed 64-bit integer")
        return self

    @property
    def variables(self) -> List[str]:
        return [f.var for f in self.factors]


class ExpEquation(BaseModel):
    """Canonical form: sum(terms) = 0."""
    model_config = ConfigDict(frozen=True)

    terms: List[Term]
    variables: List[str] = Field(default_factory=list)

    @model_validator(mode="before")
    @classmethod
    def _default_variables(cls, data):
        if isinstance(data, dict) and not data.get("variables"):
            seen: List[str] = []
            for term in data.get("terms", []):
                factors = term.factors if isinstance(term, Term) else term.get("factors", [])
                for f in factors:
                    var = f.var if isinstance(f, Factor) else f["var"]
                    if var not in seen:
                        seen.append(var)
            data = {**data, "variables": seen}
        return data

    @model_validator(mode="after")
    def _check_shape(self):
        if len(self.terms) < 3:
            raise ValueError(f"an equation needs at least 3 terms, got {len(self.terms)}")
        used = {f.var for t in self.terms for f in t.factors}
        if set(self.variables) != used or len(set(self.variables)) != len(self.variables):
            raise ValueError("variables must list every exponent variable exactly once")
        return self

    def terms_with(self, var: str) -> List[int]:
        return [i for i, t in enumerate(self.terms) if var in t.variables]


class FamilyInstance(BaseModel):
    """(N-1)^x + N^y + (N+1)^z = (N+2)^w with N = 4^e."""
    model_config = ConfigDict(frozen=True)

    e: int
    N: int
    a: int
    b: int
    c: int
    d: int
    mu_x: float
    mu_y: float
    mu_z: float

    @model_validator(mode="after")
    def _check_family(self):
        if self.e < 1 or self.N != 4**self.e:
            raise ValueError("N must equal 4^e with e >= 1")
        if (self.a, self.b, self.c, self.d) != (self.N - 1, self.N, self.N + 1, self.N + 2):
            raise ValueError("bases must be N-1, N, N+1, N+2")
        if min(self.mu_x, self.mu_y, self.mu_z) <= 1:
            raise ValueError("growth ratios exceed 1")
        return self
