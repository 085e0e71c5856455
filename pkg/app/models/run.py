from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class Command(str, Enum):
    SOLVE = "solve"
    SIEVE = "sieve"
    CHAIN = "chain"
    AUTO_MODULUS = "auto-modulus"
    BOUNDS = "bounds"
    REPLAY_TABLE = "replay-table"
    PIPELINE = "pipeline"
    VERIFY = "verify"


class OutputFormat(str, Enum):
    TEXT = "text"
    JSON = "json"
    PDF = "pdf"


class RunConfig(BaseModel):
    """Validated command line invocation."""
    command: Command
    equation: Optional[str] = None
    family_e: Optional[int] = Field(default=None, ge=1)
    moduli: List[str] = Field(default_factory=list)
    constraints: List[str] = Field(default_factory=list)
    primes: List[int] = Field(default_factory=list)
    exponent_caps: Dict[int, int] = Field(default_factory=dict)
    max_exp: Optional[int] = Field(default=None, ge=1)
    budget: int = Field(gt=0)
    output_format: OutputFormat = OutputFormat.TEXT
    precision: int = Field(default=96, ge=80)
    threads: int = Field(default=1, ge=1)
    out: Optional[Path] = None
    size_bounds: bool = True
    table: Optional[int] = None
    bound: Optional[str] = None
    e: Optional[int] = Field(default=None, ge=1)
    certificate: Optional[Path] = None

    @model_validator(mode="after")
    def _required_per_command(self):
        needs_equation = {Command.SOLVE, Command.SIEVE, Command.CHAIN, Command.AUTO_MODULUS}
        if self.command in needs_equation and (self.equation is None) == (self.family_e is None):
            raise ValueError(f"{self.command.value} needs exactly one of --eq and --family-e")
        if self.command in (Command.SIEVE, Command.CHAIN) and not self.moduli:
            raise ValueError(f"{self.command.value} needs at least one --modulus")
        if self.command == Command.SIEVE and len(self.moduli) != 1:
            raise ValueError("sieve takes exactly one --modulus; use chain for several")
        if self.command == Command.SOLVE and self.max_exp is None:
            raise ValueError("solve needs --max-exp")
        if self.command == Command.AUTO_MODULUS and not self.primes:
            raise ValueError("auto-modulus needs --primes")
        if self.command == Command.REPLAY_TABLE and self.table not in (1, 2):
            raise ValueError("replay-table takes --table 1 or --table 2")
        if self.command == Command.BOUNDS and self.bound is None:
            raise ValueError("bounds needs --case")
        if self.command == Command.VERIFY and self.certificate is None:
            raise ValueError("verify needs a certificate path")
        if self.output_format == OutputFormat.PDF:
            if self.command not in (Command.PIPELINE, Command.SIEVE, Command.CHAIN):
                raise ValueError("pdf output is available for pipeline, sieve and chain")
            if self.out is None:
                raise ValueError("pdf output needs --out")
        return self


class SolveRequest(BaseModel):
    equation: str
    max_exp: int = Field(ge=1, le=64)
    constraints: List[str] = Field(default_factory=list)


class SieveRequest(BaseModel):
    equation: str
    moduli: List[str] = Field(min_length=1)
    constraints: List[str] = Field(default_factory=list)
    size_bounds: bool = True
    budget: Optional[int] = Field(default=None, gt=0)
