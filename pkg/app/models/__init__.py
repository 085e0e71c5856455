from .equation import Assignment, ExpEquation, Factor, FamilyInstance, Term
from .residues import (
    ChainStep,
    Constraint,
    ConstraintKind,
    ConstraintSet,
    EventuallyPeriodicSequence,
    OutcomeKind,
    ResidueClassSystem,
    SieveOutcome,
    Slot,
)
from .bounds import (
    BakerPadicParams,
    BakerRationalParams,
    BoundKind,
    BoundReport,
    CaseReport,
    Compatibility,
    ConstantComparison,
    InequalityCheck,
    LogTerm,
    RealInterval,
    ThresholdReport,
    ValuationChainReport,
    ValuationCheck,
    Verdict,
)
from .trace import (
    BoundClaim,
    Certificate,
    CertificateKind,
    CheckReport,
    DeductionStep,
    DeductionTrace,
    PipelineReport,
    Stage,
    Table1Row,
    Table2Row,
    VerificationResult,
)
from .run import Command, OutputFormat, RunConfig, SieveRequest, SolveRequest

__all__ = [
    "Assignment", "ExpEquation", "Factor", "FamilyInstance", "Term",
    "ChainStep", "Constraint", "ConstraintKind", "ConstraintSet", "EventuallyPeriodicSequence",
    "OutcomeKind", "ResidueClassSystem", "SieveOutcome", "Slot",
    "BakerPadicParams", "BakerRationalParams", "BoundKind", "BoundReport", "CaseReport",
    "Compatibility", "ConstantComparison", "InequalityCheck", "LogTerm", "RealInterval",
    "ThresholdReport", "ValuationChainReport", "ValuationCheck", "Verdict",
    "BoundClaim", "Certificate", "CertificateKind", "CheckReport", "DeductionStep", "DeductionTrace",
    "PipelineReport", "Stage", "Table1Row", "Table2Row", "VerificationResult",
    "Command", "OutputFormat", "RunConfig", "SieveRequest", "SolveRequest",
]
