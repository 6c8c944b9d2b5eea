"""Runtime settings read from the environment (and an optional .env file)."""

import logging
import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

from .errors import MinramError

SCHEMA_TAG = "minram/1"
DEFAULT_SCAN_LIMIT = 10**7

logger = logging.getLogger(__name__)


class Settings(BaseModel):
    """Search and logging settings shared by the CLI and the planner."""

    scan_limit: int = Field(default=DEFAULT_SCAN_LIMIT, ge=2, description="Cap for prime scans")
    jobs: int = Field(default=1, ge=1, description="Worker threads for prime scans")
    log_level: str = Field(default="INFO")
    schema_tag: str = SCHEMA_TAG


def _int_from_env(name: str) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw.replace("_", ""))
    except ValueError as e:
        raise MinramError(f"Environment variable {name} must be an integer, got {raw!r}") from e


def load_settings(
    scan_limit: Optional[int] = None,
    jobs: Optional[int] = None,
    log_level: Optional[str] = None,
) -> Settings:
    """Build settings from MINRAM_* variables; explicit arguments win over the environment."""
    load_dotenv()

    env_limit = _int_from_env("MINRAM_LIMIT")
    env_jobs = _int_from_env("MINRAM_JOBS")
    env_level = os.getenv("MINRAM_LOG_LEVEL")

    settings = Settings(
        scan_limit=scan_limit or env_limit or DEFAULT_SCAN_LIMIT,
        jobs=jobs or env_jobs or 1,
        log_level=(log_level or env_level or "INFO").upper(),
    )
    logger.debug(f"Loaded settings: {settings}")
    return settings
