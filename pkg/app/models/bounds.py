from enum import Enum
from fractions import Fraction
from typing import Annotated, Any, Dict, List, Optional

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, model_validator

Rational = Annotated[
    Fraction,
    BeforeValidator(lambda v: v if isinstance(v, Fraction) else Fraction(v)),
    PlainSerializer(str, return_type=str),
]


class LogTerm(BaseModel):
    """scale * log(argument), kept symbolic so comparisons can be exact."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    scale: Rational = Fraction(1)
    argument: Rational

    @model_validator(mode="after")
    def _check_positive(self):
        if self.scale < 0 or self.argument < 1:
            raise ValueError("a height is a nonnegative multiple of log(argument >= 1)")
        return self

    def dominates(self, other: "LogTerm") -> bool:
        """Exact test of self >= other."""
        denominator = self.scale.denominator * other.scale.denominator
        left = self.argument ** int(self.scale * denominator)
        right = other.argument ** int(other.scale * denominator)
        return left >= right

    def describe(self) -> str:
        if self.scale == 1:
            return f"log({self.argument})"
        return f"{self.scale}*log({self.argument})"


class RealInterval(BaseModel):
    """Closed interval with float endpoints rounded outward."""
    lower: float
    upper: float

    @model_validator(mode="after")
    def _ordered(self):
        if self.lower > self.upper:
            raise ValueError("interval endpoints out of order")
        return self


class BakerPadicParams(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    p: int
    alpha1: Rational
    alpha2: Rational
    g: int = Field(ge=1)
    E: Rational
    H1: LogTerm
    H2: LogTerm
    b1: int = Field(ge=1)
    b2: int = Field(ge=1)


class BakerRationalParams(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha1: Rational
    alpha2: Rational
    H1: LogTerm
    H2: LogTerm
    b1: int = Field(ge=1)
    b2: int = Field(ge=1)


class BoundKind(str, Enum):
    PADIC = "padic"
    RATIONAL = "rational"


class BoundReport(BaseModel):
    kind: BoundKind
    bound_value: float
    interval: RealInterval
    regime: str
    precision: int
    inputs: Dict[str, Any]


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNDECIDED = "undecided"


class InequalityCheck(BaseModel):
    """lhs < rhs, decided on outward-rounded intervals."""
    label: str
    lhs: RealInterval
    rhs: RealInterval
    verdict: Verdict


class Compatibility(str, Enum):
    COMPATIBLE = "compatible"
    INCOMPATIBLE = "incompatible"


class CaseReport(BaseModel):
    case: str
    e: int
    result: Compatibility
    checks: List[InequalityCheck] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)


class ThresholdReport(BaseModel):
    e: int
    threshold: int
    rhs_at_threshold: RealInterval
    crossing_unique: bool
    precision: int


class ConstantComparison(BaseModel):
    case: str
    e: int
    general_prefactor: RealInterval
    printed_prefactor: RealInterval
    agree: bool


class ValuationCheck(BaseModel):
    label: str
    expression: str
    valuation: int
    required: int
    holds: bool


class ValuationChainReport(BaseModel):
    e: int
    solution: List[int]
    checks: List[ValuationCheck]
    bounds: List[BoundReport] = Field(default_factory=list)
    bounds_respected: bool = True

    @property
    def holds(self) -> bool:
        return self.bounds_respected and all(c.holds for c in self.checks)
