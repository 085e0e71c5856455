"""Published moduli and outputs, read from app/data/tables.json."""
import json
import logging
from functools import lru_cache
from typing import List

from pydantic import BaseModel, ValidationError

from ..core.config import settings
from ..core.errors import TableDataError

logger = logging.getLogger(__name__)


class Table1Entry(BaseModel):
    e: int
    label: str
    modulus: str
    output: str


class Table2Entry(BaseModel):
    case: str
    constraints: List[str]
    published_moduli: List[str]
    moduli: List[str]
    variable: str
    bound: int


class PublishedTables(BaseModel):
    table1: List[Table1Entry]
    table2: List[Table2Entry]


@lru_cache(maxsize=1)
def published_tables() -> PublishedTables:
    path = settings.TABLES_FILE
    if not path.exists():
        logger.warning("table data missing at %s", path)
        raise TableDataError(f"table data not found at {path}")
    try:
        with open(path, encoding="utf-8") as f:
            return PublishedTables.model_validate(json.load(f))
    except (json.JSONDecodeError, ValidationError) as exc:
        logger.error("table data at %s is unreadable: %s", path, exc)
        raise TableDataError(f"table data at {path} is unreadable") from exc


def table1_entries() -> List[Table1Entry]:
    return published_tables().table1


def table2_entries() -> List[Table2Entry]:
    return published_tables().table2
