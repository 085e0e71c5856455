"""Outward-rounded interval helpers shared by the bound and casework services."""
import logging
from fractions import Fraction
from functools import lru_cache
from typing import Union

from mpmath import libmp
from mpmath.ctx_iv import MPIntervalContext
from mpmath.libmp import round_ceiling, round_floor

from ..core.config import settings
from ..models import InequalityCheck, LogTerm, RealInterval, Verdict

logger = logging.getLogger(__name__)

Number = Union[int, Fraction, str]


def interval_context(precision: int | None = None) -> MPIntervalContext:
    return _context(max(80, precision or settings.WORKING_PRECISION))


@lru_cache(maxsize=None)
def _context(precision: int) -> MPIntervalContext:
    ctx = MPIntervalContext()
    ctx.prec = precision
    return ctx


def exact(ctx: MPIntervalContext, value: Number):
    """Tightest interval enclosing an integer, fraction or decimal string."""
    if isinstance(value, Fraction):
        return ctx.mpf(value.numerator) / ctx.mpf(value.denominator)
    return ctx.mpf(value)


def log_term(ctx: MPIntervalContext, term: LogTerm):
    return exact(ctx, term.scale) * ctx.ln(exact(ctx, term.argument))


def lower(x) -> float:
    return libmp.to_float(x._mpi_[0], rnd=round_floor)


def upper(x) -> float:
    return libmp.to_float(x._mpi_[1], rnd=round_ceiling)


def floor_int(x) -> int:
    return int(libmp.to_int(x._mpi_[0], rnd=round_floor))


def ceil_int(x) -> int:
    return int(libmp.to_int(x._mpi_[1], rnd=round_ceiling))


def to_model(x) -> RealInterval:
    return RealInterval(lower=lower(x), upper=upper(x))


def certainly_less(x, y) -> bool:
    """x < y for every point of both intervals."""
    return libmp.mpf_lt(x._mpi_[1], y._mpi_[0])


def certainly_at_least(x, y) -> bool:
    return libmp.mpf_ge(x._mpi_[0], y._mpi_[1])


def compare(label: str, lhs, rhs) -> InequalityCheck:
    """Decide lhs < rhs: holds, fails (lhs >= rhs everywhere) or undecided."""
    if certainly_less(lhs, rhs):
        verdict = Verdict.HOLDS
    elif certainly_at_least(lhs, rhs):
        verdict = Verdict.FAILS
    else:
        verdict = Verdict.UNDECIDED
        logger.debug("undecided inequality %s: %s vs %s", label, lhs, rhs)
    return InequalityCheck(label=label, lhs=to_model(lhs), rhs=to_model(rhs), verdict=verdict)


def growth_ratios(ctx: MPIntervalContext, N: int):
    """(mu_x, mu_y, mu_z) = log(N+2) over log(N-1), log N, log(N+1)."""
    top = ctx.ln(ctx.mpf(N + 2))
    return top / ctx.ln(ctx.mpf(N - 1)), top / ctx.ln(ctx.mpf(N)), top / ctx.ln(ctx.mpf(N + 1))


def mu_sum(ctx: MPIntervalContext, N: int):
    mu_x, _, mu_z = growth_ratios(ctx, N)
    return mu_x + mu_z


def interval_max(ctx: MPIntervalContext, x, y):
    lo = x._mpi_[0] if libmp.mpf_ge(x._mpi_[0], y._mpi_[0]) else y._mpi_[0]
    hi = x._mpi_[1] if libmp.mpf_ge(x._mpi_[1], y._mpi_[1]) else y._mpi_[1]
    return ctx.make_mpf((lo, hi))


def dominant_branch(x, y) -> str:
    """Which argument of max(x, y) is active: 'first', 'second' or 'ambiguous'."""
    if certainly_at_least(x, y):
        return "first"
    if certainly_at_least(y, x):
        return "second"
    return "ambiguous"
