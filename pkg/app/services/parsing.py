import logging
import re
from typing import Iterable, List, Tuple

from pydantic import ValidationError
from sympy import factorint

from ..core.errors import EquationSyntaxError, InvalidEquationError
from ..models import Constraint, ConstraintKind, ConstraintSet, ExpEquation, Factor, Term

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[\^*+\-=]))")

_CLAUSE = re.compile(
    r"^\s*(?P<var>[A-Za-z_][A-Za-z0-9_]*)\s*"
    r"(?:(?P<parity>odd|even)"
    r"|(?:≡|==?)\s*(?P<residue>-?\d+)\s*(?:mod|\(mod)\s*(?P<modulus>\d+)\s*\)?"
    r"|(?P<op>>=|<=|!=|≠|≥|≤|=)\s*(?P<value>-?\d+))\s*$"
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        match = _TOKEN.match(stripped, pos)
        if match is None:
            bad = pos + len(stripped[pos:]) - len(stripped[pos:].lstrip())
            raise EquationSyntaxError(f"unexpected character {stripped[bad]!r}", bad)
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append((kind, match.group(kind), start))
        pos = match.end()
    tokens.append(("end", "", len(stripped)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> Tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self, kind: str, value: str | None = None) -> Tuple[str, str, int]:
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            wanted = value or kind
            found = tok[1] or "end of input"
            raise EquationSyntaxError(f"expected {wanted!r}, found {found!r}", tok[2])
        self.i += 1
        return tok

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        return tok[0] == kind and (value is None or tok[1] == value)

    def side(self) -> List[Tuple[int, List[Tuple[int, str]]]]:
        following = self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else self.peek()
        if self.at("int", "0") and (following[0] == "end" or following[1] == "="):
            self.i += 1
            return []
        sign = 1
        if self.at("op", "-"):
            self.take("op")
            sign = -1
        terms = [self.term(sign)]
        while self.at("op", "+") or self.at("op", "-"):
            sign = 1 if self.take("op")[1] == "+" else -1
            terms.append(self.term(sign))
        return terms

    def term(self, sign: int) -> Tuple[int, List[Tuple[int, str]]]:
        _, digits, _ = self.take("int")
        if self.at("op", "^"):
            self.take("op")
            factors = [(int(digits), self.take("ident")[1])]
            coeff = 1
        elif self.at("op", "*"):
            self.take("op")
            coeff = int(digits)
            factors = [self.power()]
        else:
            return sign * int(digits), []
        while self.at("op", "*"):
            self.take("op")
            factors.append(self.power())
        return sign * coeff, factors

    def power(self) -> Tuple[int, str]:
        base = int(self.take("int")[1])
        self.take("op", "^")
        return base, self.take("ident")[1]


def parse_equation(text: str) -> ExpEquation:
    """Parse ``lhs = rhs`` into the canonical form sum(terms) = 0."""
    parser = _Parser(text)
    lhs = parser.side()
    parser.take("op", "=")
    rhs = parser.side()
    parser.take("end")
    raw = lhs + [(-coeff, factors) for coeff, factors in rhs]
    try:
        terms = [
            Term(coefficient=coeff, factors=[Factor(base=b, var=v) for b, v in factors])
            for coeff, factors in raw
        ]
        return ExpEquation(terms=terms)
    except ValidationError as exc:
        raise InvalidEquationError(exc.errors()[0]["msg"].removeprefix("Value error, ")) from exc


def _render_term(coeff: int, term: Term) -> str:
    powers = "*".join(f"{f.base}^{f.var}" for f in term.factors)
    if not powers:
        return str(coeff)
    return powers if coeff == 1 else f"{coeff}*{powers}"


def _join(parts: List[Tuple[int, Term]]) -> str:
    if not parts:
        return "0"
    out = ""
    for i, (coeff, term) in enumerate(parts):
        body = _render_term(abs(coeff), term)
        if coeff < 0:
            out += "-" + body
        else:
            out += ("+" if i else "") + body
    return out


def render(eq: ExpEquation) -> str:
    """Inverse of parse_equation."""
    signs = [t.coefficient > 0 for t in eq.terms]
    split = signs.index(False) if False in signs else len(signs)
    if all(not s for s in signs[split:]):
        lhs = [(t.coefficient, t) for t in eq.terms[:split]]
        rhs = [(-t.coefficient, t) for t in eq.terms[split:]]
        return f"{_join(lhs)}={_join(rhs)}"
    return _join([(t.coefficient, t) for t in eq.terms]) + "=0"


def parse_modulus(text: str | int) -> int:
    """Accept ``2^2*7*13`` or a plain integer."""
    if isinstance(text, int):
        value = text
    else:
        value = 1
        for part in text.replace(" ", "").split("*"):
            if not re.fullmatch(r"\d+(\^\d+)?", part):
                raise EquationSyntaxError(f"bad modulus factor {part!r}", text.find(part))
            base, _, power = part.partition("^")
            value *= int(base) ** int(power or 1)
    if value < 2:
        raise InvalidEquationError(f"modulus must be at least 2, got {value}")
    return value


def format_modulus(modulus: int) -> str:
    """Canonical factored form, e.g. 2^2*7*13."""
    parts = []
    for p, k in sorted(factorint(modulus).items()):
        parts.append(f"{p}^{k}" if k > 1 else str(p))
    return "*".join(parts)


def parse_constraint(clause: str) -> Constraint:
    match = _CLAUSE.match(clause)
    if match is None:
        raise EquationSyntaxError(f"cannot read constraint {clause!r}", 0)
    var = match["var"]
    if match["parity"]:
        return Constraint(var=var, kind=ConstraintKind.PARITY, value=1 if match["parity"] == "odd" else 0)
    if match["modulus"]:
        return Constraint(var=var, kind=ConstraintKind.CONGRUENCE, value=int(match["residue"]),
                          modulus=int(match["modulus"]))
    kind = {
        "=": ConstraintKind.FIXED,
        ">=": ConstraintKind.LOWER, "≥": ConstraintKind.LOWER,
        "<=": ConstraintKind.UPPER, "≤": ConstraintKind.UPPER,
        "!=": ConstraintKind.EXCLUDE, "≠": ConstraintKind.EXCLUDE,
    }[match["op"]]
    return Constraint(var=var, kind=kind, value=int(match["value"]))


def parse_constraints(clauses: Iterable[str]) -> ConstraintSet:
    """Each clause may hold several comma separated constraints."""
    try:
        parsed = [parse_constraint(part) for clause in clauses for part in clause.split(",") if part.strip()]
        return ConstraintSet(constraints=parsed)
    except ValidationError as exc:
        raise InvalidEquationError(exc.errors()[0]["msg"].removeprefix("Value error, ")) from exc
