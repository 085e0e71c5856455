import logging
import os
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

class Settings:
    """Application settings and configuration."""

    # API Configuration
    API_TITLE = "expsieve"
    API_DESCRIPTION = "Modular sieve, Baker bounds and casework replay for purely exponential equations."
    API_VERSION = "0.1.0"

    # Enumeration and precision
    ENUMERATION_BUDGET = int(os.getenv("EXPSIEVE_BUDGET", str(10**9)))
    WORKING_PRECISION = max(80, int(os.getenv("EXPSIEVE_PRECISION", "96")))
    WORKERS = max(1, int(os.getenv("EXPSIEVE_THREADS", "1")))
    MAX_CANDIDATES = int(os.getenv("EXPSIEVE_MAX_CANDIDATES", "4096"))

    # Caps for "for all e" replays
    PROOF_E_CAP = int(os.getenv("EXPSIEVE_PROOF_CAP", "64"))
    STRUCTURE_N_CAP = int(os.getenv("EXPSIEVE_STRUCTURE_CAP", "1024"))

    LOG_LEVEL = os.getenv("EXPSIEVE_LOG_LEVEL", "WARNING")

    # Published moduli
    TABLES_FILE = Path(__file__).resolve().parent.parent / "data" / "tables.json"

settings = Settings()


def configure_logging(level: str | None = None) -> None:
    """Install one stream handler on the package logger."""
    logger = logging.getLogger("app")
    logger.setLevel((level or settings.LOG_LEVEL).upper())
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        logger.addHandler(handler)
