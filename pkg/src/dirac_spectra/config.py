"""Configuration management."""

from functools import lru_cache
from pathlib import Path

from pydantic import Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        populate_by_name=True,
    )

    # Half-axis grid
    grid_max: float = Field(default=12.0, validation_alias="DIRAC_GRID_MAX")
    grid_step: float = Field(default=1.0 / 256.0, validation_alias="DIRAC_GRID_STEP")

    # Quadrature
    quad_tol: float = Field(default=1e-12, validation_alias="DIRAC_QUAD_TOL")

    # Cauchy integrator
    cauchy_rtol: float = Field(default=1e-10, validation_alias="DIRAC_CAUCHY_RTOL")
    cauchy_atol: float = Field(default=1e-14, validation_alias="DIRAC_CAUCHY_ATOL")

    # Gel'fand-Levitan engine
    singular_floor: float = Field(default=1e-13, validation_alias="DIRAC_SINGULAR_FLOOR")

    # Shooting scan
    scan_x_max: float = Field(default=8.0, validation_alias="DIRAC_SCAN_X_MAX")
    scan_rtol: float = Field(default=1e-9, validation_alias="DIRAC_SCAN_RTOL")
    scan_depth: float = Field(default=6.0, validation_alias="DIRAC_SCAN_DEPTH")
    scan_lambda_tol: float = Field(default=1e-6, validation_alias="DIRAC_SCAN_LAMBDA_TOL")

    # Verification
    verify_window: float = Field(default=3.5, validation_alias="DIRAC_VERIFY_WINDOW")
    verify_tol: float = Field(default=1e-6, validation_alias="DIRAC_VERIFY_TOL")

    # Logging
    log_level: str = Field(default="INFO", validation_alias="LOG_LEVEL")
    log_file: Path | None = Field(default=None, validation_alias="LOG_FILE")

    @field_validator(
        "grid_max",
        "grid_step",
        "quad_tol",
        "cauchy_rtol",
        "cauchy_atol",
        "singular_floor",
        "scan_x_max",
        "scan_rtol",
        "scan_depth",
        "scan_lambda_tol",
        "verify_window",
        "verify_tol",
    )
    @classmethod
    def validate_positive(cls, v: float) -> float:
        """Validate numerical knobs are positive."""
        if not v > 0:
            raise ValueError(f"Value must be positive, got {v}")
        return v

    @model_validator(mode="after")
    def validate_grid(self) -> "Settings":
        """Validate the grid step fits inside the grid."""
        if self.grid_step >= self.grid_max:
            raise ValueError(
                f"Grid step must be smaller than grid max, got {self.grid_step} >= {self.grid_max}"
            )
        return self

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level is recognized."""
        valid = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}
        if v.upper() not in valid:
            raise ValueError(f"Log level must be one of {valid}, got {v}")
        return v.upper()


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
