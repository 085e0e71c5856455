from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .equation import ExpEquation, FamilyInstance
from .residues import ConstraintSet, SieveOutcome


class DeductionStep(BaseModel):
    lemma: str
    claim: str
    method: str
    verified: bool
    detail: Dict[str, Any] = Field(default_factory=dict)


class DeductionTrace(BaseModel):
    instance: FamilyInstance
    steps: List[DeductionStep] = Field(default_factory=list)
    final_constraints: ConstraintSet = Field(default_factory=ConstraintSet)

    @property
    def failed(self) -> bool:
        return not all(step.verified for step in self.steps)


class CheckReport(BaseModel):
    """A finite replay of a "for all" claim."""
    name: str
    verified: bool
    checked: int
    failures: List[Any] = Field(default_factory=list)
    detail: Dict[str, Any] = Field(default_factory=dict)


class Table1Row(BaseModel):
    e: int
    label: str
    modulus: str
    published_output: str
    outcome: Optional[SieveOutcome] = None
    reproduced: str
    matches: bool


class Table2Row(BaseModel):
    case: str
    constraints: List[str]
    published_moduli: List[str]
    moduli: List[str]
    published_bound: int
    outcome: SieveOutcome
    matches: bool


class CertificateKind(str, Enum):
    SIEVE = "sieve"
    CHAIN = "chain"
    BOUND = "bound"


class BoundClaim(BaseModel):
    """A bound-type claim, e.g. operation ``s_threshold`` with e=1 and value 5042."""
    operation: str
    e: Optional[int] = None
    value: int
    precision: int


class Certificate(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    kind: CertificateKind
    label: str = ""
    equation: Optional[ExpEquation] = None
    moduli: List[str] = Field(default_factory=list)
    constraints: List[str] = Field(default_factory=list)
    outcome: Optional[SieveOutcome] = None
    bound: Optional[BoundClaim] = None


class VerificationResult(BaseModel):
    valid: bool
    detail: str
    first_difference: Optional[str] = None


class Stage(BaseModel):
    name: str
    claim: str
    method: str
    verified: bool
    detail: Dict[str, Any] = Field(default_factory=dict)
    certificates: List[str] = Field(default_factory=list)


class PipelineReport(BaseModel):
    """Solutions as (n, x, y, z, w); wall-clock seconds kept apart in ``timing``."""
    solutions: List[Tuple[int, int, int, int, int]]
    stages: List[Stage]
    certificates: List[Certificate] = Field(default_factory=list)
    timing: Dict[str, float] = Field(default_factory=dict)

    def deterministic_dump(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True, exclude={"timing"})
