from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache
from typing import Optional

class Settings(BaseSettings):
    # Application Settings
    app_name: str = "Riccati Order Reduction"
    app_version: str = "1.0.0"
    debug: bool = False
    environment: str = "development"
    host: str = "0.0.0.0"
    port: int = 8000

    # Numerical Settings
    seed: int = 0
    rel_tol: float = 1e-10
    abs_residual: float = 1e-8
    max_enumeration_order: int = 8
    lift_samples_per_parameter: int = 3
    oracle_max_iter: int = 10000

    # Logging
    log_level: str = "WARNING"
    log_dir: Optional[str] = None

    model_config = SettingsConfigDict(env_prefix="RICCATI_", env_file=".env")

    @property
    def is_production(self) -> bool:
        return self.environment == "production"

@lru_cache()
def get_settings() -> Settings:
    return Settings()

settings = get_settings()
