class ExpSieveError(Exception):
    """Base class for every error raised by the toolkit."""


class EquationSyntaxError(ExpSieveError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class InvalidEquationError(ExpSieveError):
    """The text parsed but violates an ExpEquation invariant."""


class MissingAssignmentError(ExpSieveError):
    pass


class EmptySearchBoxError(ExpSieveError):
    pass


class BudgetExceededError(ExpSieveError):
    def __init__(self, estimated: int, budget: int):
        super().__init__(f"enumeration needs ~{estimated} evaluations, budget is {budget}")
        self.estimated = estimated
        self.budget = budget


class VariableMismatchError(ExpSieveError):
    pass


class InvariantViolationError(ExpSieveError):
    """Parameters do not satisfy the hypotheses of a bound."""


class ProofStepError(ExpSieveError):
    """A mechanised proof step did not verify."""


class PipelineStageError(ExpSieveError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}' failed: {message}")
        self.stage = stage


class CertificateError(ExpSieveError):
    """A certificate file does not match the certificate schema."""


class TableDataError(ExpSieveError):
    """The published table data is missing or unreadable."""
