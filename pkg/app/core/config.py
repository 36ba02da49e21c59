"""Application configuration via environment variables."""

from functools import lru_cache
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "FrozenTree"
    APP_ENV: str = "development"
    LOG_LEVEL: str = "INFO"

    # Seeding (a --seed flag always wins over DEFAULT_SEED)
    DEFAULT_SEED: Optional[int] = None

    # Monte Carlo
    DEFAULT_REPLICAS: int = 1_000_000
    Z_THRESHOLD: float = 4.0
    CHUNK_SIZE: int = 20_000
    WORKERS: int = 1
    MAX_BATCH_FLOATS: int = 1 << 24

    # Quadrature
    QUADRATURE_STEPS: int = 100_000

    # Output
    OUTPUT_FORMAT: str = "csv"
    SCHEMA_VERSION: str = "1.0"


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
