import os
from dataclasses import dataclass
from typing import Dict, Optional

from dotenv import load_dotenv
from pydantic_settings import BaseSettings

from errors import InputError

# Load environment variables
load_dotenv()

_CAP_KEYS = {
    "enumeration": "enumeration_cap",
    "fock": "fock_dimension_cap",
    "sweep": "sweep_cap",
}


@dataclass(frozen=True)
class Caps:
    """Resource limits applied to enumeration, Fock spaces and subgraph sweeps."""
    enumeration_cap: int
    fock_dimension_cap: int
    sweep_cap: int

    def override(self, **values: Optional[int]) -> "Caps":
        merged = {
            "enumeration_cap": self.enumeration_cap,
            "fock_dimension_cap": self.fock_dimension_cap,
            "sweep_cap": self.sweep_cap,
        }
        for key, value in values.items():
            if value is None:
                continue
            if key not in merged:
                raise InputError(f"unknown cap '{key}'")
            if value <= 0:
                raise InputError(f"cap '{key}' must be positive, got {value}")
            merged[key] = int(value)
        return Caps(**merged)


def parse_caps_string(raw: str) -> Dict[str, int]:
    """Parse a GPFACTOR_CAPS value such as ``enumeration=5000,sweep=10``."""
    parsed: Dict[str, int] = {}
    for chunk in raw.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        key, sep, value = chunk.partition("=")
        key = key.strip().lower()
        if not sep or key not in _CAP_KEYS:
            raise InputError(f"GPFACTOR_CAPS: cannot read '{chunk}' (keys: {', '.join(_CAP_KEYS)})")
        try:
            number = int(value.strip())
        except ValueError:
            raise InputError(f"GPFACTOR_CAPS: '{value.strip()}' is not an integer") from None
        if number <= 0:
            raise InputError(f"GPFACTOR_CAPS: {key} must be positive")
        parsed[_CAP_KEYS[key]] = number
    return parsed


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Logging
    log_level: str = os.getenv("GPFACTOR_LOG_LEVEL", "WARNING")

    # Resource caps
    enumeration_cap: int = int(os.getenv("GPFACTOR_ENUMERATION_CAP", "1000000"))
    fock_dimension_cap: int = int(os.getenv("GPFACTOR_FOCK_DIMENSION_CAP", "20000"))
    sweep_cap: int = int(os.getenv("GPFACTOR_SWEEP_CAP", "16"))
    caps: str = os.getenv("GPFACTOR_CAPS", "")

    # Numerics
    tolerance: float = float(os.getenv("GPFACTOR_TOLERANCE", "1e-10"))
    spectral_tolerance: float = float(os.getenv("GPFACTOR_SPECTRAL_TOLERANCE", "1e-9"))

    # Reporting
    isomorphism_list_cap: int = int(os.getenv("GPFACTOR_ISOMORPHISM_LIST_CAP", "100"))

    def resolved_caps(self) -> Caps:
        """Individual cap settings with the GPFACTOR_CAPS string layered on top."""
        base = Caps(
            enumeration_cap=self.enumeration_cap,
            fock_dimension_cap=self.fock_dimension_cap,
            sweep_cap=self.sweep_cap,
        )
        return base.override(**parse_caps_string(self.caps))

    class Config:
        env_file = ".env"
        env_prefix = "GPFACTOR_"
        case_sensitive = False
        extra = "ignore"


# Global settings instance
settings = Settings()
