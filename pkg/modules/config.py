"""
Configuration management for schlafli-lab
"""
import os
import logging
from typing import Dict, Any
from dotenv import load_dotenv


class Config:
    """Centralized configuration management"""

    def __init__(self):
        # Load environment variables from .env file when present
        load_dotenv()
        self._validate_config()

    @property
    def threads(self) -> int:
        """Upper bound on concurrently running checks"""
        value = self._read_int("SCHLAFLI_LAB_THREADS", "1")
        if value < 1:
            raise ValueError(f"SCHLAFLI_LAB_THREADS must be >= 1, got {value}")
        return value

    @property
    def seed(self) -> int:
        """Seed for every randomized fuzz check"""
        return self._read_int("SCHLAFLI_LAB_SEED", "0")

    @property
    def quadrature_tol(self) -> float:
        """Absolute tolerance for polyhedron volume quadrature"""
        value = self._read_float("SCHLAFLI_LAB_QUAD_TOL", "1e-10")
        if value < 1e-12:
            raise ValueError(f"SCHLAFLI_LAB_QUAD_TOL must be >= 1e-12, got {value}")
        return value

    @property
    def fd_step(self) -> float:
        """Default central-difference step in the deformation parameter"""
        value = self._read_float("SCHLAFLI_LAB_FD_STEP", "1e-4")
        if value <= 0:
            raise ValueError(f"SCHLAFLI_LAB_FD_STEP must be positive, got {value}")
        return value

    @property
    def log_level(self) -> int:
        """Logging level name from environment, WARNING by default"""
        name = os.getenv("SCHLAFLI_LAB_LOG_LEVEL", "WARNING").upper()
        level = logging.getLevelName(name)
        if not isinstance(level, int):
            raise ValueError(f"SCHLAFLI_LAB_LOG_LEVEL is not a logging level: {name}")
        return level

    def suite_defaults(self) -> Dict[str, Any]:
        """Defaults that seed a SuiteConfigModel before --config and --seed overrides"""
        return {
            "seed": self.seed,
            "threads": self.threads,
            "quadrature_tol": self.quadrature_tol,
            "fd_step": self.fd_step,
        }

    def _read_int(self, name: str, default: str) -> int:
        raw = os.getenv(name, default)
        try:
            return int(raw)
        except ValueError:
            raise ValueError(f"{name} must be an integer, got {raw!r}")

    def _read_float(self, name: str, default: str) -> float:
        raw = os.getenv(name, default)
        try:
            return float(raw)
        except ValueError:
            raise ValueError(f"{name} must be a number, got {raw!r}")

    def _validate_config(self):
        """Fail early on malformed environment values"""
        self.threads
        self.quadrature_tol
        self.fd_step
        self.log_level


# Global configuration instance
config = Config()


if __name__ == "__main__":
    # CLI utility for inspecting the effective configuration
    print("schlafli-lab configuration")
    print("=" * 50)
    for key, value in config.suite_defaults().items():
        print(f"{key}: {value}")
    print(f"log_level: {logging.getLevelName(config.log_level)}")
