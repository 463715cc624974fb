# Python standard library imports
import os
from typing import Dict, Optional

# Third party imports
from dotenv import load_dotenv


class EnvironmentConfig:
    """Centralized environment configuration for the toolkit."""

    _config: Dict[str, Optional[str]] = {}
    _loaded: bool = False

    OPTIONAL_KEYS = ("PMOE_SEED", "PMOE_LOG_LEVEL")

    @classmethod
    def load_environment(cls, dotenv_path: Optional[str] = None) -> None:
        """
        Load the optional .env file, then read the toolkit variables. Nothing is
        required: a missing .env or variable simply leaves the value unset.
        """
        load_dotenv(dotenv_path=dotenv_path, override=False)
        cls._config = {key: os.getenv(key) for key in cls.OPTIONAL_KEYS}
        cls._loaded = True

    @classmethod
    def get(cls, key: str, default: Optional[str] = None) -> Optional[str]:
        """Get a configuration value, loading the environment on first use."""
        if not cls._loaded:
            cls.load_environment()
        value = cls._config.get(key)
        return default if value is None or value == "" else value

    @classmethod
    def seed(cls) -> Optional[int]:
        """PMOE_SEED as an int, or None when unset.

        Raises:
            ValueError: If PMOE_SEED is not an integer
        """
        value = cls.get("PMOE_SEED")
        if value is None:
            return None
        try:
            return int(value)
        except ValueError as e:
            raise ValueError(f"PMOE_SEED must be an integer, got {value!r}") from e

    @classmethod
    def reset(cls) -> None:
        cls._config = {}
        cls._loaded = False
