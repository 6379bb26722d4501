"""
Unified runtime configuration for the manifold conservation lab.
"""
import logging
from pathlib import Path

from dotenv import load_dotenv
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables from the project directory
env_path = Path(__file__).parent / ".env"
load_dotenv(env_path)

LIBRARY_DIR = Path(__file__).parent / "scenarios" / "library"


class LabSettings(BaseSettings):
    """Settings read from MANIFOLD_LAB_* environment variables."""

    model_config = SettingsConfigDict(env_prefix="MANIFOLD_LAB_", extra="ignore")

    output_root: Path = Field(
        default=Path("runs"),
        description="Directory under which run artifacts are written",
    )
    threads: int = Field(
        default=1,
        ge=1,
        description="Upper bound on worker threads used inside one run",
    )
    log_level: str = Field(
        default="INFO",
        description="Root logging level (DEBUG, INFO, WARNING, ERROR)",
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        """Accept only level names the logging module knows."""
        level = str(v).upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"Unknown log level: {v}")
        return level


def get_settings(**overrides) -> LabSettings:
    """
    Build settings from the environment.

    Args:
        **overrides: Values that take precedence over environment variables
            (None values are ignored so CLI flags can be passed straight through)

    Returns:
        Validated LabSettings
    """
    explicit = {key: value for key, value in overrides.items() if value is not None}
    return LabSettings(**explicit)


def configure_logging(settings: LabSettings) -> None:
    """Configure the root logger once for CLI entry points."""
    logging.basicConfig(
        level=getattr(logging, settings.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
