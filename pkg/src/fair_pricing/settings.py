from __future__ import annotations

from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    FAIRPRICE_SEED: int | None = None

    ORACLE_TOL: float = 1e-6
    BRUTE_FORCE_GRID_STEP: float = 1e-3
    GOLDEN_MAX_ITERATIONS: int = 200
    FEASIBILITY_SLACK: float = 1e-9

    TRACE_SAMPLE_EVERY: int = 1000
    LB_VERIFY_GRID_STEP: float = 1e-4

    OUTPUT_DIR: str = "results"
    WORKERS: int | None = None
    LOG_LEVEL: str = "WARNING"


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()


def reset_settings_cache() -> None:
    get_settings.cache_clear()
